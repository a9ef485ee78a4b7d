"""Dense eigendecomposition baseline: exact features, ideal projector, similarity metrics.

Everything here is the reference path: it is exact, O(n^3), and serves both as
the spectral-clustering baseline and as the oracle the filtered pipeline is
judged against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .graphs import LaplacianMatrix
from .kmeans import Assignment, KmeansConfig, kmeans

DENSE_CAP_DEFAULT = 5000


class CapacityError(RuntimeError):
    """Dense eigendecomposition refused because the graph is too large."""


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Bottom-k eigenpairs of a Laplacian, plus the (k+1)-th eigenvalue.

    Eigenvectors are orthonormal columns with a deterministic sign (first
    nonzero coordinate positive). lambda_next exposes the spectral gap used by
    perturbation bounds.
    """

    eigenvalues: np.ndarray
    lambda_next: float
    vectors: np.ndarray

    @property
    def k(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])


def _fix_signs(u: np.ndarray) -> np.ndarray:
    """Flip columns so the first non-negligible coordinate is positive."""
    absu = np.abs(u)
    thresh = 1e-8 * absu.max(axis=0)
    first = (absu > thresh).argmax(axis=0)
    signs = np.sign(u[first, np.arange(u.shape[1])])
    return u * signs


def eigendecompose(L: LaplacianMatrix, k: int, dense_cap: int = DENSE_CAP_DEFAULT) -> SpectralBasis:
    """Bottom-k eigenpairs (and the next eigenvalue) by dense symmetric solve."""
    n = L.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if n > dense_cap:
        raise CapacityError(
            f"dense eigendecomposition capped at n={dense_cap}, got n={n}; "
            "use the filtered path (csc_assign) instead"
        )
    vals, vecs = sla.eigh(L.matrix.toarray(), subset_by_index=(0, k))
    return SpectralBasis(vals[:k].copy(), float(vals[k]), _fix_signs(vecs[:, :k]))


def ideal_projector_apply(basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    """Apply the orthogonal projector onto span of the basis, U (U^T x).

    This is the exact low-pass response with cutoff at the k-th eigenvalue,
    applied without materializing the n x n projector.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != basis.n:
        raise ValueError("row count does not match the basis")
    u = basis.vectors
    return u @ (u.T @ x)


def spectral_similarity(a: SpectralBasis, b: SpectralBasis) -> float:
    """Frobenius distance between the two ideal projectors.

    Computed in Gram form as sqrt(2k - 2 ||U_a^T U_b||_F^2), clamped at zero;
    O(n k^2) instead of O(n^2 k). Ranges from 0 (same span) to sqrt(2k)
    (orthogonal spans).
    """
    if a.n != b.n or a.k != b.k:
        raise ValueError("bases must share node count and k")
    if np.array_equal(a.vectors, b.vectors):
        # the Gram form below would square away half the precision and turn
        # an identical span into ~1e-8; identical bases are exactly zero
        return 0.0
    gram = a.vectors.T @ b.vectors
    val = 2.0 * a.k - 2.0 * float((gram * gram).sum())
    return float(np.sqrt(max(val, 0.0)))


def edge_similarity(la: LaplacianMatrix, lb: LaplacianMatrix) -> float:
    """Frobenius norm of the Laplacian difference, over the sparse union of supports."""
    if la.variant != lb.variant:
        raise ValueError(f"Laplacian variants differ: {la.variant!r} vs {lb.variant!r}")
    if la.n != lb.n:
        raise ValueError("node counts differ")
    diff = (la.matrix - lb.matrix).tocsr()
    return float(np.sqrt((diff.data ** 2).sum()))


def perturbation_eigengap(prev: SpectralBasis, cur: SpectralBasis) -> float:
    """Gap alpha = min(lambda_k of the current graph, prev lambda_{k+1} - current lambda_k).

    Positive alpha controls how far the invariant subspace can rotate per unit
    of Laplacian change.
    """
    if prev.k != cur.k:
        raise ValueError("bases must share k")
    lam_k = float(cur.eigenvalues[-1])
    return min(lam_k, prev.lambda_next - lam_k)


def sc_assign(L: LaplacianMatrix, k: int, kmeans_cfg: KmeansConfig | None = None,
              seed=0, dense_cap: int = DENSE_CAP_DEFAULT) -> Assignment:
    """Spectral clustering baseline: k-means on the rows of the bottom-k eigenvectors."""
    basis = eigendecompose(L, k, dense_cap=dense_cap)
    return kmeans(basis.vectors, k, kmeans_cfg or KmeansConfig(), seed)
