"""Static compressive spectral clustering: cluster filtered random signals.

Instead of the bottom-k eigenvectors, k-means runs on the rows of
h(L) R where R is an n x d Gaussian block and h a low-pass Chebyshev filter
whose cutoff is located by the randomized eigencount search. Pairwise row
distances of the filtered block approximate those of the exact features, so
assignment quality tracks the exact baseline up to an additive margin that
shrinks like sqrt(k/d).
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .filters import FilterConfig, FilterPoly, MatvecCounter, _search_cutoff
from .graphs import LaplacianMatrix
from .kmeans import Assignment, KmeansConfig, kmeans
from .signals import FeatureMatrix, as_seed_sequence, random_signals  # noqa: F401  (re-exported)


@dataclass
class CscDiagnostics:
    """Run log of one compressive clustering call."""

    lambda_k: float
    search_iters: int
    matvecs: int
    wall_ms: float
    d: int


def cost_margin(k: int, d: int, t: float) -> float:
    """Additive margin 2 sqrt(k/d) (sqrt(k) + t) between filtered and exact cost.

    The clustering cost obtained from d filtered signals exceeds the exact
    spectral-feature cost by at most this much, with probability at least
    1 - exp(-t^2 / 2). t is a reporting parameter, not a runtime knob.
    """
    return 2.0 * np.sqrt(k / d) * (np.sqrt(k) + t)


def reuse_cost_margin(k: int, d: int, t: float, p: float, rho: float,
                      delta: float = 1.0) -> float:
    """Cost margin when a fraction p of the features comes from the previous graph.

    Adds (1 + delta) * p * rho to the static margin, where rho is the
    projector (spectral) similarity between the consecutive graphs.
    """
    return cost_margin(k, d, t) + (1.0 + delta) * p * rho


def _features_core(L: LaplacianMatrix, k: int, d: int, cfg: FilterConfig,
                   seed, counter: MatvecCounter | None, step_tag: int):
    """Cutoff search + filtered features, sharing the probe work."""
    if not 1 <= k < L.n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={L.n}")
    if d < k:
        warnings.warn(
            f"d={d} < k={k}: fewer signals than clusters leaves the sketch "
            "rank-deficient; clustering quality is unguaranteed",
            stacklevel=3,
        )
    signals = random_signals(L.n, d, seed)
    interval = (0.0, L.lambda_max_bound)
    cutoff, filtered, poly, iters, _ = _search_cutoff(L, k, signals, interval, cfg, counter, 1.0)
    return FeatureMatrix.tagged(filtered, step_tag), float(cutoff), poly, iters


def csc_features(L: LaplacianMatrix, k: int, d: int,
                 filter_cfg: FilterConfig | None = None, seed=0,
                 counter: MatvecCounter | None = None, step_tag: int = 0
                 ) -> tuple[FeatureMatrix, float, FilterPoly]:
    """Filtered random-signal features for clustering.

    Runs the cutoff search and returns (features, accepted cutoff, filter);
    the features are the ones filtered by the accepting probe, so no extra
    filtering pass is spent after the search.
    """
    cfg = filter_cfg or FilterConfig()
    features, cutoff, poly, _ = _features_core(L, k, d, cfg, seed, counter, step_tag)
    return features, cutoff, poly


def csc_assign(L: LaplacianMatrix, k: int, d: int,
               filter_cfg: FilterConfig | None = None,
               kmeans_cfg: KmeansConfig | None = None,
               seed=0, counter: MatvecCounter | None = None
               ) -> tuple[Assignment, CscDiagnostics]:
    """Compressive spectral clustering: k-means on the rows of the filtered block."""
    cfg = filter_cfg or FilterConfig()
    counter = counter if counter is not None else MatvecCounter()
    start_count = counter.count
    t0 = time.perf_counter()
    ss = as_seed_sequence(seed)
    sig_ss, km_ss = ss.spawn(2)
    features, cutoff, _, iters = _features_core(L, k, d, cfg, sig_ss, counter, step_tag=0)
    assignment = kmeans(features.values, k, kmeans_cfg or KmeansConfig(), km_ss)
    diag = CscDiagnostics(
        lambda_k=cutoff,
        search_iters=iters,
        matvecs=counter.count - start_count,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        d=d,
    )
    return assignment, diag


def alignment_Q(rprime: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal d x d alignment built from the SVD of a k x d block.

    For rprime = Ql S Qr^T, returns Q = blockdiag(Ql, I_{d-k}) Qr^T together
    with the singular values S. Q aligns the exact features (padded to d
    columns) with the randomly projected ones: the residual of that alignment
    equals ||S - 1|| exactly, which makes this the sharpest correctness oracle
    of the package.
    """
    rprime = np.atleast_2d(np.asarray(rprime, dtype=np.float64))
    k, d = rprime.shape
    if k > d:
        raise ValueError(f"need k <= d, got shape {rprime.shape}")
    ql, sing, qrt = np.linalg.svd(rprime, full_matrices=True)
    block = np.zeros((d, d))
    block[:k, :k] = ql
    if d > k:
        block[k:, k:] = np.eye(d - k)
    return block @ qrt, sing
