"""Lloyd's k-means with plus-plus seeding.

The cost reported everywhere is ||F - X X^T F||_F where X is the normalized
cluster-indicator matrix, i.e. the square root of the usual
sum-of-squared-distances-to-centroids objective. It is evaluated in centroid
form, never by materializing X X^T.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import as_seed_sequence


@dataclass(frozen=True)
class KmeansConfig:
    restarts: int = 10
    max_iters: int = 100
    tol: float = 1e-6
    init: str = "kmeanspp"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.init != "kmeanspp":
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True, eq=False)
class Assignment:
    """Cluster labels plus sizes and the cost on the features it was solved on."""

    labels: np.ndarray
    cluster_sizes: np.ndarray
    feature_cost: float

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def k(self) -> int:
        return int(self.cluster_sizes.size)

    def indicator(self) -> np.ndarray:
        """Dense n x k indicator X with entries 1/sqrt(s_j); satisfies X^T X = I."""
        x = np.zeros((self.n, self.k))
        x[np.arange(self.n), self.labels] = 1.0 / np.sqrt(self.cluster_sizes[self.labels])
        return x


def _pairwise_sq_dists(f: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        (f * f).sum(axis=1)[:, None]
        - 2.0 * f @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(f: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = f.shape[0]
    centroids = np.empty((k, f.shape[1]))
    centroids[0] = f[rng.integers(n)]
    closest = ((f - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centroids[j] = f[idx]
        np.minimum(closest, ((f - centroids[j]) ** 2).sum(axis=1), out=closest)
    return centroids


def _means_by_label(f: np.ndarray, labels: np.ndarray, k: int):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, f.shape[1]))
    np.add.at(sums, labels, f)
    means = sums / np.maximum(counts, 1)[:, None]
    return means, counts


def _lloyd(f: np.ndarray, k: int, rng: np.random.Generator,
           max_iters: int, tol: float):
    """One restart. Returns (labels, squared cost, per-iteration cost history)."""
    centroids = _kmeanspp_init(f, k, rng)
    history = []
    prev_cost2 = np.inf
    labels = np.zeros(f.shape[0], dtype=np.int64)
    for _ in range(max_iters):
        d2 = _pairwise_sq_dists(f, centroids)
        labels = d2.argmin(axis=1)

        # Empty-cluster repair: reseed at the point currently farthest from its
        # centroid, so every s_j >= 1 and 1/sqrt(s_j) stays defined.
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            own = d2[np.arange(f.shape[0]), labels].copy()
            for j in np.flatnonzero(counts == 0):
                idx = int(own.argmax())
                labels[idx] = j
                centroids[j] = f[idx]
                own[idx] = -1.0

        centroids, counts = _means_by_label(f, labels, k)
        cost2 = float(((f - centroids[labels]) ** 2).sum())
        history.append(np.sqrt(cost2))
        if np.isfinite(prev_cost2) and prev_cost2 - cost2 <= tol * prev_cost2:
            prev_cost2 = cost2
            break
        prev_cost2 = cost2
    return labels, prev_cost2, history


def kmeans(f: np.ndarray, k: int, cfg: KmeansConfig | None = None, seed=0) -> Assignment:
    """Best of cfg.restarts Lloyd runs; deterministic given seed.

    Each restart draws from its own spawned RNG stream, so the winner does not
    depend on execution order; ties in cost keep the earliest restart.
    """
    cfg = cfg or KmeansConfig()
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    if not np.all(np.isfinite(f)):
        raise ValueError("features must be finite")
    n = f.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")

    streams = as_seed_sequence(seed).spawn(cfg.restarts)
    best = None
    for r, child in enumerate(streams):
        labels, cost2, _ = _lloyd(f, k, np.random.default_rng(child), cfg.max_iters, cfg.tol)
        if best is None or cost2 < best[0]:
            best = (cost2, r, labels)
    cost2, _, labels = best
    sizes = np.bincount(labels, minlength=k)
    return Assignment(labels, sizes, float(np.sqrt(max(cost2, 0.0))))


def kmeans_cost(f: np.ndarray, assignment: Assignment) -> float:
    """Cost of an existing assignment on features f, in centroid form.

    Equals ||F - X X^T F||_F for the assignment's indicator X: the projection
    X X^T replaces each row by its cluster mean.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != assignment.n:
        raise ValueError("feature rows and assignment length differ")
    means, _ = _means_by_label(f, assignment.labels, assignment.k)
    return float(np.sqrt(((f - means[assignment.labels]) ** 2).sum()))


def evaluate_on_basis(basis, assignment: Assignment) -> float:
    """Cost of an assignment measured on the exact spectral features.

    This is the evaluation-harness metric: whatever features produced the
    assignment, quality is judged against the bottom-k eigenvector matrix.
    """
    return kmeans_cost(basis.vectors, assignment)
