"""Spectral partitioning nomination: scaled eigenvector embedding of the
adjacency matrix, k-means over the rows, seed-majority centroid
selection, and distance ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from vnom.metrics import NominationList

# Above this size a Lanczos solver finds the few needed eigenpairs far
# faster than a full dense decomposition (single-core budget).
_DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Embedding:
    """Rows are vertex coordinates; column j has squared norm |eigenvalue_j|."""

    X: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class Clustering:
    labels: np.ndarray
    centroids: np.ndarray
    objective: float
    chosen_centroid: int | None = None


def default_dimension(lam, rel_tol=1e-8):
    """Numerical rank of Lambda: singular values above rel_tol * max."""
    s = np.linalg.svd(np.asarray(lam, dtype=float), compute_uv=False)
    if s[0] == 0.0:
        return 1
    return max(1, int(np.sum(s > rel_tol * s[0])))


def _fix_signs(vectors):
    """Deterministic sign convention: each column's largest-magnitude entry
    (first on ties) is made positive."""
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            vectors[:, j] = -col
    return vectors


def embed(graph, d):
    """Scaled spectral embedding from the d largest-modulus eigenpairs of
    the 0/1 adjacency matrix."""
    N = graph.num_vertices
    if not 1 <= d <= N:
        raise ValueError(f"d must lie in 1..{N}, got {d}")
    if N <= _DENSE_LIMIT or d > N // 10:
        A = graph.adjacency.astype(float)
        w, V = scipy.linalg.eigh(A)
        idx = np.argsort(-np.abs(w), kind="stable")[:d]
        vals = w[idx]
        vecs = V[:, idx]
    else:
        A = graph.adjacency.astype(np.float64)
        v0 = np.full(N, 1.0 / np.sqrt(N))
        w, V = scipy.sparse.linalg.eigsh(A, k=d, which="LM", v0=v0)
        idx = np.argsort(-np.abs(w), kind="stable")
        vals = w[idx]
        vecs = V[:, idx]
    vecs = _fix_signs(vecs / np.linalg.norm(vecs, axis=0))
    X = vecs * np.sqrt(np.abs(vals))
    return Embedding(X=X, eigenvalues=vals)


def _seed_centroids(points, K, rng):
    """Greedy farthest-point seeding: a random first center, then each
    next center at the point farthest from all chosen centers."""
    first = int(rng.integers(len(points)))
    centers = [points[first]]
    dist = np.linalg.norm(points - centers[0], axis=1)
    for _ in range(1, K):
        nxt = int(np.argmax(dist))
        centers.append(points[nxt])
        dist = np.minimum(dist, np.linalg.norm(points - centers[-1], axis=1))
    return np.array(centers)


def _lloyd(points, centers, max_iter=300):
    labels = None
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        # empty-cluster repair: move the centroid to the farthest point
        claimed = []
        for k in range(len(centers)):
            if not (new_labels == k).any():
                gaps = d2[np.arange(len(points)), new_labels].copy()
                if claimed:
                    gaps[claimed] = -1.0
                far = int(np.argmax(gaps))
                new_labels[far] = k
                claimed.append(far)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(len(centers)):
            centers[k] = points[labels == k].mean(axis=0)
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    objective = float(d2[np.arange(len(points)), labels].sum())
    return labels, centers, objective


def kmeans(X, K, restarts=10, rng_seed=0):
    """Best-of-restarts Lloyd's algorithm; deterministic given rng_seed.
    Ties between restarts go to the earliest."""
    points = np.asarray(X, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if K < 1 or K > len(points):
        raise ValueError(f"K must lie in 1..{len(points)}, got {K}")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, r)))
        centers = _seed_centroids(points, K, rng)
        labels, centers, objective = _lloyd(points, centers.copy())
        if best is None or objective < best[2] - 1e-12:
            best = (labels, centers, objective)
    labels, centers, objective = best
    return Clustering(labels=labels + 1, centroids=centers, objective=objective)


def _canonical_cluster_order(centroids):
    """Cluster indices sorted by lexicographic centroid order."""
    return np.lexsort(centroids.T[::-1])


def choose_block1_centroid(clustering, seed_labels):
    """The cluster holding the most block-1 seeds; ties go to the lowest
    index under lexicographic centroid ordering."""
    K = len(clustering.centroids)
    block1_seeds = np.flatnonzero(np.asarray(seed_labels) == 1)
    if len(block1_seeds) == 0:
        raise ValueError("at least one block-1 seed is required")
    counts = np.bincount(clustering.labels[block1_seeds] - 1, minlength=K)
    order = _canonical_cluster_order(clustering.centroids)
    best = order[int(np.argmax(counts[order]))]
    return int(best)


def spectral_nominate(graph, K, d=None, restarts=10, rng_seed=0, model=None):
    """Embed, cluster, pick the seed-majority centroid, and rank ambiguous
    vertices by ascending distance to it (ties by vertex id)."""
    if d is None:
        if model is None:
            raise ValueError("d must be given when the model (Lambda) is unknown")
        d = default_dimension(model.lam)
    emb = embed(graph, d)
    clustering = kmeans(emb.X, K, restarts=restarts, rng_seed=rng_seed)
    c = choose_block1_centroid(clustering, graph.seed_labels)
    centroid = clustering.centroids[c]
    amb = graph.ambiguous_vertices()
    dist = np.linalg.norm(emb.X[amb] - centroid, axis=1)
    order = amb[np.argsort(dist, kind="stable")]
    return NominationList(order=order, seed_count=graph.seed_count)
