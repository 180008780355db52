"""Graph and model representations, SBM sampling, and block likelihoods.

Vertices are indexed 0-based internally; all file formats are 1-based.
Block labels are 1..K everywhere (matching the 1-based file formats).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

PROB_EPS = 1e-6


class SizeMismatchError(ValueError):
    """An assignment, graph, or model disagree on vertex or block counts."""


class ParseError(ValueError):
    """A malformed input file."""


def clamp_probabilities(lam, eps=PROB_EPS):
    """Clamp a probability matrix entrywise into [eps, 1-eps].

    Applied to every Lambda (given or estimated) before logs are taken, so
    log(lam) and log(1-lam) are always finite.
    """
    lam = np.asarray(lam, dtype=float)
    return np.clip(lam, eps, 1.0 - eps)


@dataclass(frozen=True)
class BlockModel:
    """SB(K, m, n, b, Lambda) parameter bundle.

    m_sizes[k] / n_sizes[k] count seeds / ambiguous vertices in block k+1.
    lam is the symmetric K x K matrix of adjacency probabilities.
    """

    m_sizes: tuple
    n_sizes: tuple
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m_sizes", tuple(int(x) for x in self.m_sizes))
        object.__setattr__(self, "n_sizes", tuple(int(x) for x in self.n_sizes))
        lam = np.array(self.lam, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        K = len(self.m_sizes)
        if K < 1 or len(self.n_sizes) != K:
            raise SizeMismatchError("m_sizes and n_sizes must have equal positive length")
        if lam.shape != (K, K):
            raise SizeMismatchError(f"Lambda must be {K}x{K}, got {lam.shape}")
        if not np.allclose(lam, lam.T):
            raise ValueError("Lambda must be symmetric")
        if lam.min() < 0.0 or lam.max() > 1.0:
            raise ValueError("Lambda entries must lie in [0, 1]")
        if any(x < 0 for x in self.m_sizes) or any(x < 0 for x in self.n_sizes):
            raise ValueError("block sizes must be nonnegative")
        if self.n < 1:
            raise ValueError("at least one ambiguous vertex is required")
        if self.n_sizes[0] < 1:
            raise ValueError("the block of interest must have ambiguous members (n_1 >= 1)")

    @property
    def K(self):
        return len(self.m_sizes)

    @property
    def m(self):
        return sum(self.m_sizes)

    @property
    def n(self):
        return sum(self.n_sizes)

    @property
    def num_vertices(self):
        return self.m + self.n

    def clamped_lam(self, eps=PROB_EPS):
        return clamp_probabilities(self.lam, eps)


@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph with seed labels and optional hidden truth.

    Vertices 0..m-1 are seeds (set U); vertices m..m+n-1 are ambiguous
    (set V). true_labels, when present, give the block of each ambiguous
    vertex and are used only for evaluation.
    """

    adjacency: np.ndarray
    seed_labels: np.ndarray
    true_labels: np.ndarray | None = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        seed = np.asarray(self.seed_labels, dtype=int)
        seed.setflags(write=False)
        object.__setattr__(self, "seed_labels", seed)
        if self.true_labels is not None:
            truth = np.asarray(self.true_labels, dtype=int)
            truth.setflags(write=False)
            object.__setattr__(self, "true_labels", truth)
        N = adj.shape[0]
        if adj.shape != (N, N):
            raise SizeMismatchError("adjacency must be square")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed (simple graph)")
        if not (adj == adj.T).all():
            raise ValueError("adjacency must be symmetric")
        if seed.ndim != 1 or len(seed) > N:
            raise SizeMismatchError("seed_labels must cover a prefix of the vertices")
        if self.true_labels is not None and len(self.true_labels) != N - len(seed):
            raise SizeMismatchError("true_labels must cover exactly the ambiguous vertices")

    @property
    def num_vertices(self):
        return self.adjacency.shape[0]

    @property
    def seed_count(self):
        return len(self.seed_labels)

    @property
    def ambiguous_count(self):
        return self.num_vertices - self.seed_count

    def ambiguous_vertices(self):
        return np.arange(self.seed_count, self.num_vertices)


@dataclass(frozen=True)
class BlockAssignment:
    """A full candidate block membership function on all vertices."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or len(labels) == 0:
            raise ValueError("labels must be a nonempty vector")
        if labels.min() < 1:
            raise ValueError("block labels are 1-based")

    def check_membership(self, model, seed_labels):
        """Verify agreement with the seeds and the ambiguous block sizes."""
        m = len(seed_labels)
        if len(self.labels) != model.num_vertices:
            raise SizeMismatchError("assignment length does not match the model")
        if not np.array_equal(self.labels[:m], seed_labels):
            raise ValueError("assignment must agree with the seed labels")
        counts = np.bincount(self.labels[m:], minlength=model.K + 1)[1:]
        if not np.array_equal(counts, np.asarray(model.n_sizes)):
            raise SizeMismatchError("ambiguous block sizes do not match n_sizes")


@dataclass(frozen=True)
class EdgeCounts:
    """Upper-triangular within/between-block edge and nonedge counts."""

    e: np.ndarray
    c: np.ndarray


def contiguous_assignment(model):
    """The canonical assignment with seeds then ambiguous vertices labeled
    contiguously block by block (1's first, then 2's, ...)."""
    labels = []
    for k, cnt in enumerate(model.m_sizes, start=1):
        labels.extend([k] * cnt)
    for k, cnt in enumerate(model.n_sizes, start=1):
        labels.extend([k] * cnt)
    return BlockAssignment(np.array(labels, dtype=int))


def sample_sbm(model, membership, rng_seed):
    """Realize a graph: each pair {w, w'} is an independent Bernoulli edge
    with parameter Lambda[b(w), b(w')]. Deterministic given rng_seed."""
    membership.check_membership(model, membership.labels[: model.m])
    N = model.num_vertices
    labels0 = membership.labels - 1
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    probs = model.lam[labels0[:, None], labels0[None, :]]
    upper = np.triu(rng.random((N, N)) < probs, k=1)
    adj = upper | upper.T
    return LabeledGraph(
        adjacency=adj,
        seed_labels=membership.labels[: model.m],
        true_labels=membership.labels[model.m :],
    )


def sample_sbm_blockwise(model, membership, rng_seed):
    """Memory-lean sampler for large graphs: draws each block pair
    separately instead of materializing an N x N float matrix.

    Requires a contiguous membership (labels nondecreasing within U and
    within V per block). Produces the same distribution as sample_sbm but
    not the same bits for a given seed.
    """
    membership.check_membership(model, membership.labels[: model.m])
    N = model.num_vertices
    labels0 = membership.labels - 1
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    adj = np.zeros((N, N), dtype=bool)
    starts = {}
    for k in range(model.K):
        idx = np.flatnonzero(labels0 == k)
        starts[k] = idx
    for k in range(model.K):
        ik = starts[k]
        if len(ik) == 0:
            continue
        block = rng.random((len(ik), len(ik))) < model.lam[k, k]
        block = np.triu(block, k=1)
        adj[np.ix_(ik, ik)] |= block | block.T
        for l in range(k + 1, model.K):
            il = starts[l]
            if len(il) == 0:
                continue
            cross = rng.random((len(ik), len(il))) < model.lam[k, l]
            adj[np.ix_(ik, il)] = cross
            adj[np.ix_(il, ik)] = cross.T
    return LabeledGraph(
        adjacency=adj,
        seed_labels=membership.labels[: model.m],
        true_labels=membership.labels[model.m :],
    )


def edge_counts(graph, assignment):
    """Exact per-block-pair edge and nonedge counts for an assignment."""
    if len(assignment.labels) != graph.num_vertices:
        raise SizeMismatchError("assignment must cover all vertices")
    labels0 = assignment.labels - 1
    K = int(labels0.max()) + 1
    onehot = np.zeros((graph.num_vertices, K))
    onehot[np.arange(graph.num_vertices), labels0] = 1.0
    raw = onehot.T @ graph.adjacency @ onehot
    e = np.triu(raw, k=1) + np.diag(np.diag(raw) / 2)
    sizes = onehot.sum(axis=0)
    pair_counts = np.triu(np.outer(sizes, sizes), k=1) + np.diag(sizes * (sizes - 1) / 2)
    c = pair_counts - e
    return EdgeCounts(e=np.rint(e).astype(np.int64), c=np.rint(c).astype(np.int64))


def log_likelihood(graph, assignment, model, eps=PROB_EPS):
    """log p(b, G) = sum over k <= l of e log(Lambda) + c log(1-Lambda)."""
    counts = edge_counts(graph, assignment)
    K = model.K
    if counts.e.shape[0] > K:
        raise SizeMismatchError("assignment uses more blocks than the model")
    e = np.zeros((K, K))
    c = np.zeros((K, K))
    k = counts.e.shape[0]
    e[:k, :k] = counts.e
    c[:k, :k] = counts.c
    lam = model.clamped_lam(eps)
    mask = np.triu(np.ones((K, K), dtype=bool))
    return float(
        np.sum(e[mask] * np.log(lam[mask]) + c[mask] * np.log1p(-lam[mask]))
    )


def estimate_lambda(graph, K, seeds_only=True, eps=PROB_EPS):
    """Plug-in Lambda-hat from block edge densities.

    Entry (k, l) is the number of edges between block-k and block-l
    vertices divided by the number of such pairs, then clamped to
    [eps, 1-eps]. With seeds_only (the default) only the seed-induced
    subgraph is used; otherwise true_labels must be present and the full
    graph is censused.
    """
    if seeds_only:
        seed = graph.seed_labels
        adj = graph.adjacency[: graph.seed_count, : graph.seed_count]
    else:
        if graph.true_labels is None:
            raise ValueError("full-census estimation requires true_labels")
        seed = np.concatenate([graph.seed_labels, graph.true_labels])
        adj = graph.adjacency
    lam = np.zeros((K, K))
    for k in range(1, K + 1):
        ik = np.flatnonzero(seed == k)
        if len(ik) < 2:
            raise ValueError(
                f"block {k} has {len(ik)} seed(s); need at least 2 to estimate "
                "the within-block density"
            )
        sub = adj[np.ix_(ik, ik)]
        lam[k - 1, k - 1] = np.triu(sub, k=1).sum() / math.comb(len(ik), 2)
        for l in range(k + 1, K + 1):
            il = np.flatnonzero(seed == l)
            if len(il) == 0:
                raise ValueError(f"block {l} has no seeds")
            dens = adj[np.ix_(ik, il)].sum() / (len(ik) * len(il))
            lam[k - 1, l - 1] = lam[l - 1, k - 1] = dens
    return clamp_probabilities(lam, eps)


def mix_lambda(base, theta):
    """Convex combination of base with the all-1/2 matrix: theta*base +
    (1-theta)*0.5."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    base = np.asarray(base, dtype=float)
    if base.min() < 0.0 or base.max() > 1.0 or not np.allclose(base, base.T):
        raise ValueError("base must be a symmetric matrix with entries in [0, 1]")
    return theta * base + (1.0 - theta) * 0.5


def load_edge_list(edges_path, labels_path=None, num_vertices=None):
    """Read a 1-based whitespace edge list plus an optional seed-labels file.

    Duplicate and reversed edges collapse; self-loops are rejected. The
    vertex universe comes from an optional '#vertices N' header (or the
    num_vertices argument); otherwise it is the largest id referenced.
    """
    declared = num_vertices
    edges = []
    max_id = 0
    with open(edges_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped[1:].strip()
                if body.lower().startswith("vertices"):
                    try:
                        declared = int(body.split()[1])
                    except (IndexError, ValueError):
                        raise ParseError(
                            f"{edges_path}:{lineno}: malformed '#vertices' header"
                        ) from None
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(f"{edges_path}:{lineno}: expected two vertex ids")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{edges_path}:{lineno}: non-integer vertex id") from None
            if a < 1 or b < 1:
                raise ParseError(f"{edges_path}:{lineno}: vertex ids are 1-based")
            if a == b:
                raise ParseError(f"{edges_path}:{lineno}: self-loop on vertex {a}")
            edges.append((a, b))
            max_id = max(max_id, a, b)

    seed_pairs = []
    if labels_path is not None:
        with open(labels_path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                parts = stripped.split()
                if len(parts) != 2:
                    raise ParseError(f"{labels_path}:{lineno}: expected 'vertex block'")
                try:
                    v, blk = int(parts[0]), int(parts[1])
                except ValueError:
                    raise ParseError(f"{labels_path}:{lineno}: non-integer field") from None
                if v < 1:
                    raise ParseError(f"{labels_path}:{lineno}: vertex ids are 1-based")
                if blk < 1:
                    raise ParseError(f"{labels_path}:{lineno}: block ids are 1-based")
                seed_pairs.append((v, blk))
                max_id = max(max_id, v)

    N = declared if declared is not None else max_id
    if N < max_id:
        raise ParseError(
            f"{edges_path}: vertex {max_id} referenced but only {N} declared"
        )
    if N == 0:
        raise ParseError(f"{edges_path}: empty graph with no declared vertices")

    # Seeds must occupy the low vertex ids 1..m.
    seed_pairs.sort()
    seed_ids = [v for v, _ in seed_pairs]
    m = len(seed_ids)
    if seed_ids != list(range(1, m + 1)):
        raise ParseError(
            f"{labels_path}: seed vertices must be exactly 1..{m} (got {seed_ids})"
        )
    adj = np.zeros((N, N), dtype=bool)
    for a, b in edges:
        adj[a - 1, b - 1] = True
        adj[b - 1, a - 1] = True
    return LabeledGraph(
        adjacency=adj,
        seed_labels=np.array([blk for _, blk in seed_pairs], dtype=int),
    )


def load_lambda(path):
    """Read a Lambda matrix from a JSON file with fields K and a row-major
    'lambda' array."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "K" not in data or "lambda" not in data:
        raise ParseError(f"{path}: expected JSON object with fields 'K' and 'lambda'")
    K = int(data["K"])
    flat = np.asarray(data["lambda"], dtype=float).reshape(-1)
    if flat.size != K * K:
        raise ParseError(f"{path}: 'lambda' must contain {K * K} entries")
    lam = flat.reshape(K, K)
    if not np.allclose(lam, lam.T):
        raise ParseError(f"{path}: Lambda must be symmetric")
    if lam.min() < 0 or lam.max() > 1:
        raise ParseError(f"{path}: Lambda entries must lie in [0, 1]")
    return lam
