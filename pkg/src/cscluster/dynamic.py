"""Clustering a graph sequence with feature reuse and warm-started cutoff checks.

Step t keeps floor(d*p) filtered columns from the previous graph and generates
the rest fresh, filtering them with the previous filter. The eigencount of the
fresh block validates the old cutoff; only when it is off does a warm-started
bisection rerun. Reused columns are never refiltered: they remain features of
the previous graph, which is exactly what the mixed feature matrix is meant to
contain.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .csc import _features_core
from .filters import (FilterConfig, FilterPoly, MatvecCounter, _count_from_block,
                      _search_cutoff, apply_filter, warm_interval)
from .graphs import Graph, laplacian
from .kmeans import KmeansConfig, kmeans
from .signals import FeatureMatrix, as_seed_sequence, random_signals


@dataclass(frozen=True)
class DynamicConfig:
    """Sequence-clustering knobs; p is the fraction of feature columns reused.

    p stays at or below one half so that the reused columns can always be
    drawn from the previous step's fresh block (never from older graphs).
    """

    k: int
    d: int
    p: float = 0.5
    variant: str = "normalized"
    filter: FilterConfig = field(default_factory=FilterConfig)
    kmeans: KmeansConfig = field(default_factory=KmeansConfig)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need k >= 1")
        if self.d < 1:
            raise ValueError("need d >= 1")
        if not 0.0 <= self.p <= 0.5:
            raise ValueError("reuse fraction p must lie in [0, 0.5]")

    @property
    def reuse_count(self) -> int:
        return int(np.floor(self.d * self.p + 1e-9))


@dataclass
class DynamicState:
    """Carry-over between steps: previous features, cutoff, filter, RNG, counter."""

    t: int
    features: FeatureMatrix
    lambda_k: float
    filter: FilterPoly
    rng: np.random.SeedSequence
    counter: MatvecCounter


@dataclass
class StepDiagnostics:
    """Per-step run log; serializes to one JSON-lines record."""

    t: int
    refined: bool
    search_iters: int
    reused: int
    matvecs_fresh: int
    matvecs_total: int
    lambda_k: float
    wall_ms: float
    cost_on_basis: float | None = None

    def record(self) -> dict:
        return {
            "t": self.t,
            "refined": self.refined,
            "dichotomy_iters": self.search_iters,
            "reused": self.reused,
            "matvecs": self.matvecs_total,
            "matvecs_fresh": self.matvecs_fresh,
            "lambda_k": self.lambda_k,
            "cost_on_basis": self.cost_on_basis,
            "wall_ms": self.wall_ms,
        }


class SequenceError(RuntimeError):
    """A sequence run aborted; `step` is the 1-based index of the failed graph."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


def dynamic_init(g1: Graph, cfg: DynamicConfig, seed=0):
    """Full static compressive clustering of the first graph, cold cutoff search.

    Returns (assignment, state, diagnostics). With the same seed, the
    assignment is identical to a direct csc_assign on the same Laplacian.
    """
    ss = as_seed_sequence(seed)
    counter = MatvecCounter()
    t0 = time.perf_counter()
    lap = laplacian(g1, cfg.variant)
    sig_ss, km_ss = ss.spawn(2)
    features, cutoff, poly, iters = _features_core(
        lap, cfg.k, cfg.d, cfg.filter, sig_ss, counter, step_tag=1)
    assignment = kmeans(features.values, cfg.k, cfg.kmeans, km_ss)
    state = DynamicState(t=1, features=features, lambda_k=cutoff, filter=poly,
                         rng=ss, counter=counter)
    diag = StepDiagnostics(
        t=1, refined=False, search_iters=iters, reused=0,
        matvecs_fresh=cfg.filter.order * cfg.d, matvecs_total=counter.count,
        lambda_k=cutoff, wall_ms=(time.perf_counter() - t0) * 1e3,
    )
    return assignment, state, diag


def dynamic_step(state: DynamicState, gt: Graph, cfg: DynamicConfig):
    """Advance one step: reuse, filter fresh signals, validate the cutoff, cluster.

    The fresh raw signals are kept so that a failed validation refilters the
    same draws with the corrected filter instead of redrawing; reused columns
    are taken bitwise from the previous step's fresh block.
    """
    if gt.n != state.features.n:
        raise ValueError(f"node count changed: state has {state.features.n}, graph has {gt.n}")
    if cfg.d != state.features.d:
        raise ValueError(f"feature count changed: state has d={state.features.d}, cfg wants {cfg.d}")
    t_new = state.t + 1
    counter = state.counter
    count0 = counter.count
    t0 = time.perf_counter()
    lap = laplacian(gt, cfg.variant)

    sel_ss, sig_ss, km_ss = state.rng.spawn(3)
    n_reuse = cfg.reuse_count
    n_fresh = cfg.d - n_reuse

    eligible = np.flatnonzero(state.features.step_tags == state.t)
    chosen = np.sort(np.random.default_rng(sel_ss).choice(eligible, size=n_reuse, replace=False))

    raw = random_signals(gt.n, n_fresh, sig_ss, scale_dim=cfg.d)
    fresh = apply_filter(lap, state.filter, raw, counter)
    scale = cfg.d / n_fresh
    estimate = _count_from_block(fresh, scale)

    if abs(estimate - cfg.k) <= cfg.filter.count_tol * cfg.k:
        refined, iters = False, 0
        cutoff, poly = state.lambda_k, state.filter
    else:
        refined = True
        interval = warm_interval(state.lambda_k, lap.lambda_max_bound)
        cutoff, fresh, poly, iters, _ = _search_cutoff(
            lap, cfg.k, raw, interval, cfg.filter, counter, scale)

    reused_block = state.features.take(chosen)
    theta = FeatureMatrix(
        np.concatenate([reused_block.values, fresh], axis=1),
        np.concatenate([reused_block.step_tags, np.full(n_fresh, t_new, dtype=np.int64)]),
        np.concatenate([reused_block.stream_tags, np.arange(n_fresh, dtype=np.int64)]),
    )
    assignment = kmeans(theta.values, cfg.k, cfg.kmeans, km_ss)
    new_state = DynamicState(t=t_new, features=theta, lambda_k=cutoff, filter=poly,
                             rng=state.rng, counter=counter)
    diag = StepDiagnostics(
        t=t_new, refined=refined, search_iters=iters, reused=n_reuse,
        matvecs_fresh=cfg.filter.order * n_fresh,
        matvecs_total=counter.count - count0,
        lambda_k=cutoff, wall_ms=(time.perf_counter() - t0) * 1e3,
    )
    return assignment, new_state, diag


def run_sequence(graphs, cfg: DynamicConfig, seed=0):
    """Cluster every graph of the sequence, reusing features step to step.

    Returns one (assignment, diagnostics) pair per graph. A failure at any
    step aborts the whole run with the failing step's index.
    """
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph")
    if any(g.n != graphs[0].n for g in graphs):
        raise ValueError("all graphs in a sequence must share the node set")
    try:
        assignment, state, diag = dynamic_init(graphs[0], cfg, seed)
    except Exception as exc:
        raise SequenceError(f"sequence aborted at step 1: {exc}", step=1) from exc
    out = [(assignment, diag)]
    for idx, g in enumerate(graphs[1:], start=2):
        try:
            assignment, state, diag = dynamic_step(state, g, cfg)
        except Exception as exc:
            raise SequenceError(f"sequence aborted at step {idx}: {exc}", step=idx) from exc
        out.append((assignment, diag))
    return out
