"""Likelihood maximization nomination: estimate the block assignment by
seeded graph matching, then rank vertices by geometric-mean swap
likelihood ratios."""

from __future__ import annotations

import numpy as np

from vnom.core import PROB_EPS, BlockAssignment
from vnom.metrics import NominationList
from vnom.sgm import build_logodds_matrix, sgm_match


def mle_block_assignment(graph, model, eps=PROB_EPS, max_iter=20, tol=1e-6,
                         restarts=1, rng_seed=0):
    """Approximate argmax of p(b, G) over assignments agreeing with the
    seeds, via seeded graph matching against the log-odds matrix."""
    if graph.seed_count != model.m or graph.ambiguous_count != model.n:
        raise ValueError("graph does not match the model's seed/ambiguous sizes")
    B, bprime = build_logodds_matrix(model, graph.seed_labels, eps=eps)
    A = graph.adjacency.astype(float)
    result = sgm_match(A, B, model.m, max_iter=max_iter, tol=tol,
                       restarts=restarts, rng_seed=rng_seed)
    labels = bprime[result.perm]
    bhat = BlockAssignment(labels)
    bhat.check_membership(model, graph.seed_labels)
    return bhat


def swap_log_ratio(graph, bhat, model, v, v_prime, eps=PROB_EPS):
    """log p(b-hat with v and v' swapped, G) - log p(b-hat, G).

    Computed locally over the pairs incident to v or v'; the (v, v') pair
    cancels by the symmetry of Lambda. v must be assigned to block 1 and
    v' to some other block; both must be ambiguous.
    """
    labels = bhat.labels
    m = graph.seed_count
    if v < m or v_prime < m:
        raise ValueError("both vertices must be ambiguous")
    if labels[v] != 1 or labels[v_prime] == 1:
        raise ValueError("need b-hat(v) = 1 and b-hat(v') != 1")
    lam = model.clamped_lam(eps)
    log_lam = np.log(lam)
    log_1m = np.log1p(-lam)
    k2 = labels[v_prime] - 1
    lw = labels - 1
    keep = np.ones(graph.num_vertices, dtype=bool)
    keep[v] = keep[v_prime] = False

    def side(vertex, new_k, old_k):
        edges = graph.adjacency[vertex] & keep
        others = keep & ~graph.adjacency[vertex]
        d_edge = (log_lam[new_k, lw] - log_lam[old_k, lw])[edges].sum()
        d_non = (log_1m[new_k, lw] - log_1m[old_k, lw])[others].sum()
        return d_edge + d_non

    return float(side(v, k2, 0) + side(v_prime, 0, k2))


def _geo_mean_scores(graph, bhat, model, eps=PROB_EPS):
    """Log geometric-mean swap ratios for both segments of the list."""
    m = graph.seed_count
    labels = bhat.labels
    in1 = np.flatnonzero(labels == 1)
    in1 = in1[in1 >= m]
    out1 = np.flatnonzero(labels != 1)
    out1 = out1[out1 >= m]
    ratios = np.zeros((len(in1), len(out1)))
    for i, v in enumerate(in1):
        for j, vp in enumerate(out1):
            ratios[i, j] = swap_log_ratio(graph, bhat, model, v, vp, eps=eps)
    # empty-mean convention: a mean over no swaps is 0 (ratio 1)
    score_in = ratios.mean(axis=1) if len(out1) else np.zeros(len(in1))
    score_out = ratios.mean(axis=0) if len(in1) else np.zeros(len(out1))
    return in1, score_in, out1, score_out


def likelihood_nominate(graph, model, eps=PROB_EPS, max_iter=20, tol=1e-6,
                        restarts=1, rng_seed=0, bhat=None):
    """Two-stage nomination: b-hat from seeded graph matching, then the
    estimated block-1 vertices in increasing order of their geometric-mean
    swap ratio, followed by the rest in decreasing order of theirs. Ties
    break by ascending vertex id."""
    if bhat is None:
        bhat = mle_block_assignment(graph, model, eps=eps, max_iter=max_iter,
                                    tol=tol, restarts=restarts, rng_seed=rng_seed)
    in1, score_in, out1, score_out = _geo_mean_scores(graph, bhat, model, eps=eps)
    # in1/out1 are ascending by construction, so stable sorts break ties by id
    head = in1[np.argsort(score_in, kind="stable")]
    tail = out1[np.argsort(-score_out, kind="stable")]
    order = np.concatenate([head, tail])
    return NominationList(order=order, seed_count=graph.seed_count)
