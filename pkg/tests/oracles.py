"""Independent reference computations the tests check the library against.

Everything here deliberately avoids the library's own code paths: components
come from union-find instead of the spectrum, k-means from exhaustive
enumeration instead of Lloyd, Chebyshev coefficients from raw quadrature
instead of the closed form, and filters from a full dense eigendecomposition.
"""
from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------------------
# Union-find connected components
# ---------------------------------------------------------------------------

def component_labels(n, edge_i, edge_j):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(edge_i, edge_j):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
    return np.array([find(v) for v in range(n)])


def component_count(n, edge_i, edge_j):
    return len(set(component_labels(n, edge_i, edge_j).tolist()))


def partition_sets(labels):
    labels = np.asarray(labels)
    return {frozenset(np.flatnonzero(labels == v).tolist()) for v in np.unique(labels)}


# ---------------------------------------------------------------------------
# Exhaustive k-means
# ---------------------------------------------------------------------------

def brute_kmeans(f, k, chunk=65536):
    """Global optimum of the square-root k-means cost by enumerating all labelings.

    Returns (cost, labels). Feasible for k**n up to a few hundred thousand.
    """
    f = np.asarray(f, dtype=np.float64)
    n = f.shape[0]
    total = float((f * f).sum())
    n_lab = k ** n
    powers = k ** np.arange(n, dtype=np.int64)
    best_cost2, best_labels = np.inf, None
    for start in range(0, n_lab, chunk):
        idx = np.arange(start, min(start + chunk, n_lab), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % k
        onehot = digits[:, :, None] == np.arange(k)[None, None, :]
        sums = np.einsum("lnk,nd->lkd", onehot.astype(np.float64), f)
        counts = onehot.sum(axis=1)
        sq = (sums ** 2).sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(counts > 0, sq / np.maximum(counts, 1), 0.0)
        cost2 = total - term.sum(axis=1)
        pos = int(cost2.argmin())
        if cost2[pos] < best_cost2:
            best_cost2 = float(cost2[pos])
            best_labels = digits[pos].copy()
    return float(np.sqrt(max(best_cost2, 0.0))), best_labels


def assignment_cost(f, labels, k):
    """Cost of given labels on features f, computed straight from cluster means."""
    f = np.asarray(f, dtype=np.float64)
    cost2 = 0.0
    for j in range(k):
        members = f[np.asarray(labels) == j]
        if len(members):
            cost2 += ((members - members.mean(axis=0)) ** 2).sum()
    return float(np.sqrt(cost2))


# ---------------------------------------------------------------------------
# Chebyshev reference values
# ---------------------------------------------------------------------------

def quad_cheb_coeff(func, j, lambda_max, num=2_000_001):
    """Chebyshev coefficient of a response on [0, lambda_max] by midpoint quadrature."""
    theta = (np.arange(num) + 0.5) * np.pi / num
    lam = 0.5 * lambda_max * (1.0 - np.cos(theta))
    vals = func(lam) * np.cos(j * theta)
    return float(vals.mean() * (2.0 if j > 0 else 1.0))


def dense_filter_apply(l_dense, poly, x):
    """h(L) @ x through a dense eigendecomposition and explicit cos(j arccos) terms."""
    vals, vecs = np.linalg.eigh(np.asarray(l_dense, dtype=np.float64))
    z = np.clip(1.0 - 2.0 * vals / poly.lambda_max, -1.0, 1.0)
    theta = np.arccos(z)
    h = np.zeros_like(vals)
    for j, c in enumerate(poly.coeffs):
        h += c * np.cos(j * theta)
    return vecs @ (h[:, None] * (vecs.T @ x))


# ---------------------------------------------------------------------------
# Dense projector references
# ---------------------------------------------------------------------------

def dense_projector(l_dense, k):
    """n x n orthogonal projector onto the bottom-k eigenvectors (dense route)."""
    _, vecs = np.linalg.eigh(np.asarray(l_dense, dtype=np.float64))
    u = vecs[:, :k]
    return u @ u.T
