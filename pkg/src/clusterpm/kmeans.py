"""Lloyd-style k-means over points in the complex plane.

Deterministic given (points, q_count, seed): initial centroids are drawn
without replacement from the points with a seeded PCG64 generator,
distance ties assign to the lowest cluster index, and an empty cluster is
reseeded at the point farthest from its previous centroid. Returned
labelings are canonicalized to first-occurrence order and never contain
an empty cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ClusteringVector, canonical_labels

CENTROID_ATOL = 1e-12


@dataclass
class KMeansResult:
    clustering: ClusteringVector
    centroids: np.ndarray
    iterations: int
    inertia: float
    inertia_history: list[float]
    seed: int


def _force_nonempty(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray, q: int) -> np.ndarray:
    """Move donor points into empty clusters until every label occurs.

    Only reachable in degenerate tie situations (duplicate points); the
    donor is the point farthest from its own centroid among clusters that
    can spare one, smallest index on ties.
    """
    labels = labels.copy()
    counts = np.bincount(labels, minlength=q)
    for qi in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] > 1)
        dist = np.abs(points[donors] - centroids[labels[donors]])
        pick = donors[int(np.argmax(dist))]
        counts[labels[pick]] -= 1
        labels[pick] = qi
        counts[qi] += 1
    return labels


def kmeans_cluster(points, q_count: int, seed: int, max_iter: int = 100) -> KMeansResult:
    """Cluster N complex points into q_count groups.

    Parameters
    ----------
    points
        Complex samples, one per array element.
    q_count
        Number of clusters Q, 1 <= Q <= N.
    seed
        Seed for the centroid-initialization generator.
    max_iter
        Iteration cap; the loop also stops when the centroids are
        stationary to within ``CENTROID_ATOL`` componentwise.

    Returns
    -------
    KMeansResult
        Canonicalized assignments plus the per-iteration within-cluster
        sum of squared distances (non-increasing).
    """
    pts = np.asarray(points, dtype=complex).ravel()
    n = pts.size
    if not 1 <= q_count <= n:
        raise ValueError(f"q_count must be in [1, {n}], got {q_count}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    rng = np.random.default_rng(seed)
    centroids = pts[rng.choice(n, size=q_count, replace=False)]

    labels = np.zeros(n, dtype=int)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        dist = np.abs(pts[:, None] - centroids[None, :])
        labels = np.argmin(dist, axis=1)
        history.append(float(np.sum(dist[np.arange(n), labels] ** 2)))

        counts = np.bincount(labels, minlength=q_count)
        sums = np.bincount(labels, weights=pts.real, minlength=q_count) + 1j * np.bincount(
            labels, weights=pts.imag, minlength=q_count
        )
        new_centroids = np.where(counts > 0, sums / np.maximum(counts, 1), centroids)
        for qi in np.flatnonzero(counts == 0):
            new_centroids[qi] = pts[int(np.argmax(np.abs(pts - centroids[qi])))]

        if np.all(np.abs(new_centroids - centroids) <= CENTROID_ATOL):
            centroids = new_centroids
            break
        centroids = new_centroids

    labels = _force_nonempty(pts, labels, centroids, q_count)
    # relabel to first-occurrence order, reordering centroids to match
    order = labels[np.sort(np.unique(labels, return_index=True)[1])]
    labels = canonical_labels(labels)
    return KMeansResult(
        clustering=ClusteringVector(labels + 1, q_count),
        centroids=centroids[order],
        iterations=iterations,
        inertia=history[-1],
        inertia_history=history,
        seed=seed,
    )
