"""Seeded graph matching: maximize <A, P B P^T> over permutations fixing
the seed prefix, by Frank-Wolfe iteration over the Birkhoff polytope with
an exact linear-assignment step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from vnom.core import PROB_EPS

LEX_TIEBREAK_MAX = 30


def solve_lap(cost, maximize=False):
    """Exactly optimal assignment for a square cost matrix.

    Returns (col, value) where row i is assigned to column col[i]. For
    small problems (n <= 30) co-optimal ties resolve to the
    lexicographically smallest assignment; above that the underlying
    solver's deterministic choice is kept.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost must be square")
    if not np.isfinite(cost).all():
        raise ValueError("cost entries must be finite")
    _, col = linear_sum_assignment(cost, maximize=maximize)
    value = float(cost[np.arange(len(col)), col].sum())
    n = cost.shape[0]
    if n <= LEX_TIEBREAK_MAX:
        col = _lexicographic_assignment(cost, maximize, value)
    return col, value


def _lexicographic_assignment(cost, maximize, value):
    """Lexicographically smallest assignment among the co-optimal ones."""
    n = cost.shape[0]
    tol = 1e-9 * (1.0 + abs(value))
    avail = list(range(n))
    chosen = np.empty(n, dtype=int)
    fixed = 0.0
    for i in range(n):
        for j in avail:
            rest_rows = np.arange(i + 1, n)
            rest_cols = [c for c in avail if c != j]
            rest = 0.0
            if len(rest_cols):
                sub = cost[np.ix_(rest_rows, rest_cols)]
                r, c = linear_sum_assignment(sub, maximize=maximize)
                rest = float(sub[r, c].sum())
            total = fixed + cost[i, j] + rest
            if abs(total - value) <= tol:
                chosen[i] = j
                fixed += cost[i, j]
                avail.remove(j)
                break
        else:
            raise AssertionError("no feasible completion found; numerical tolerance too tight")
    return chosen


def build_logodds_matrix(model, seed_labels=None, eps=PROB_EPS):
    """The matrix B with B[i, j] = log(lam/(1-lam)) indexed by the
    contiguous canonical assignment: seed rows carry their given labels,
    ambiguous rows are block 1 first, then block 2, and so on."""
    lam = model.clamped_lam(eps)
    logodds = np.log(lam) - np.log1p(-lam)
    if seed_labels is None:
        labels = []
        for k, cnt in enumerate(model.m_sizes, start=1):
            labels.extend([k] * cnt)
        seed_labels = np.array(labels, dtype=int)
    else:
        seed_labels = np.asarray(seed_labels, dtype=int)
        if len(seed_labels) != model.m:
            raise ValueError("seed_labels must have length m")
    amb = []
    for k, cnt in enumerate(model.n_sizes, start=1):
        amb.extend([k] * cnt)
    bprime = np.concatenate([seed_labels, np.array(amb, dtype=int)]) - 1
    return logodds[bprime[:, None], bprime[None, :]], bprime + 1


@dataclass
class SgmResult:
    """Outcome of one seeded-graph-matching solve."""

    perm: np.ndarray
    objective: float
    relaxed_objectives: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _relaxed_terms(A, B, m):
    N = A.shape[0]
    A12, A21, A22 = A[:m, m:], A[m:, :m], A[m:, m:]
    B12, B21, B22 = B[:m, m:], B[m:, :m], B[m:, m:]
    const = float(np.sum(A[:m, :m] * B[:m, :m]))
    linear = A21 @ B21.T + A12.T @ B12
    return const, linear, A22, B22


def sgm_match(A, B, m, max_iter=20, tol=1e-6, restarts=1, rng_seed=0, polish=True):
    """Approximately maximize <A, P B P^T> over permutations whose upper
    left m x m corner is the identity.

    Frank-Wolfe from the flat doubly stochastic start, with the ascent
    direction from an exact LAP on the gradient and exact line search on
    the 1-D quadratic. Extra restarts begin at random permutations; each
    projected candidate gets a 2-swap hill climb (polish) and the best
    true objective wins, earliest start on ties.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    N = A.shape[0]
    if A.shape != (N, N) or B.shape != (N, N):
        raise ValueError("A and B must be square and of equal size")
    if not 0 <= m < N:
        raise ValueError("need 0 <= m < number of vertices")
    n = N - m
    const, linear, A22, B22 = _relaxed_terms(A, B, m)

    starts = [np.full((n, n), 1.0 / n)]
    if restarts > 1:
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, 0x5367)))
        for _ in range(restarts - 1):
            starts.append(np.eye(n)[rng.permutation(n)])

    best = None
    for Q0 in starts:
        Q, _, history, iters, converged = _frank_wolfe(
            Q0, const, linear, A22, B22, max_iter, tol
        )
        col, _ = solve_lap(Q, maximize=True)
        perm = np.concatenate([np.arange(m), m + col])
        if polish:
            perm, objective = _two_swap_polish(A, B, perm, m)
        else:
            objective = float(np.sum(A * B[perm[:, None], perm[None, :]]))
        if best is None or objective > best[1] + 1e-12:
            best = (perm, objective, history, iters, converged)
    perm, objective, history, iters, converged = best
    return SgmResult(
        perm=perm,
        objective=objective,
        relaxed_objectives=history,
        iterations=iters,
        converged=converged,
    )


def _two_swap_polish(A, B, perm, m, max_sweeps=None):
    """Steepest-ascent hill climb over pairwise swaps of the ambiguous
    positions of perm; returns the polished permutation and its
    objective."""
    N = len(perm)
    n = N - m
    perm = perm.copy()
    objective = float(np.sum(A * B[perm[:, None], perm[None, :]]))
    if n < 2:
        return perm, objective
    if max_sweeps is None:
        max_sweeps = max(100, 2 * n)
    A_amb = A[m:, :]
    for _ in range(max_sweeps):
        Bp = B[perm[:, None], perm[None, :]]
        G = A_amb @ Bp[m:, :].T
        g = np.diag(G)
        bdiag = np.diag(Bp[m:, m:])
        # unordered-pair gain of swapping ambiguous positions i and j
        delta = (
            G + G.T - g[:, None] - g[None, :]
            - A[m:, m:] * (bdiag[:, None] + bdiag[None, :] - 2.0 * Bp[m:, m:])
        )
        np.fill_diagonal(delta, -np.inf)
        i, j = np.unravel_index(np.argmax(delta), delta.shape)
        gain = 2.0 * delta[i, j]
        if gain <= 1e-10 * max(1.0, abs(objective)):
            break
        perm[m + i], perm[m + j] = perm[m + j], perm[m + i]
        objective += gain
    return perm, objective


def _relaxed_objective(Q, const, linear, A22, B22):
    return const + float(np.sum(Q * linear)) + float(np.sum(A22 * (Q @ B22 @ Q.T)))


def _frank_wolfe(Q, const, linear, A22, B22, max_iter, tol):
    f = _relaxed_objective(Q, const, linear, A22, B22)
    history = [f]
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        grad = linear + A22 @ Q @ B22.T + A22.T @ Q @ B22
        col, _ = solve_lap(grad, maximize=True)
        R = np.zeros_like(Q)
        R[np.arange(len(col)), col] = 1.0
        D = R - Q
        a = float(np.sum(A22 * (D @ B22 @ D.T)))
        b = float(np.sum(D * linear)) + float(np.sum(A22 * (Q @ B22 @ D.T + D @ B22 @ Q.T)))
        if a < -1e-12:
            alpha = min(1.0, max(0.0, -b / (2.0 * a)))
        elif a > 1e-12:
            # convex along the segment: an endpoint is optimal
            alpha = 1.0 if a + b > 0.0 else 0.0
        else:
            alpha = 1.0 if b > 0.0 else 0.0
        if alpha > 0.0:
            Q = Q + alpha * D
        f_new = _relaxed_objective(Q, const, linear, A22, B22)
        history.append(f_new)
        if abs(f_new - f) <= tol * max(1.0, abs(f)):
            f = f_new
            converged = True
            break
        f = f_new
    return Q, f, history, iters, converged
