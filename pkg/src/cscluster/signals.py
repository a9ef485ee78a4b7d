"""Random probe signals and the feature blocks built by filtering them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce an integer seed (or pass through a SeedSequence) for stream spawning."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def random_signals(n: int, d: int, seed=0, scale_dim: int | None = None) -> np.ndarray:
    """Draw an n x d matrix of centered i.i.d. Gaussian entries with variance 1/scale_dim.

    scale_dim defaults to d, so a full draw has column variance 1/d. Pass the
    full feature count explicitly when drawing a partial block whose entries
    must match the variance of the block it will be mixed into.

    Column c is generated from its own spawned RNG stream, so it depends only
    on (seed, c): columns can be produced independently and in parallel without
    changing the result.
    """
    if d < 1:
        raise ValueError("need at least one signal column")
    if n < 1:
        raise ValueError("need at least one node")
    dim = d if scale_dim is None else int(scale_dim)
    if dim < 1:
        raise ValueError("scale_dim must be positive")
    sigma = 1.0 / np.sqrt(dim)
    children = as_seed_sequence(seed).spawn(d)
    cols = [np.random.default_rng(child).normal(0.0, sigma, size=n) for child in children]
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Block of filtered signals with per-column provenance tags.

    ``step_tags[c]`` records the time step whose graph filtered column c and
    ``stream_tags[c]`` the RNG stream index within that step's draw, so reuse
    of old columns stays auditable.
    """

    values: np.ndarray
    step_tags: np.ndarray
    stream_tags: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        steps = np.asarray(self.step_tags, dtype=np.int64)
        streams = np.asarray(self.stream_tags, dtype=np.int64)
        if values.ndim != 2:
            raise ValueError("feature values must be a 2-d matrix")
        if steps.shape != (values.shape[1],) or streams.shape != (values.shape[1],):
            raise ValueError("provenance tags must have one entry per column")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "step_tags", steps)
        object.__setattr__(self, "stream_tags", streams)

    @classmethod
    def tagged(cls, values: np.ndarray, step: int) -> "FeatureMatrix":
        """Wrap a freshly filtered block: all columns from `step`, streams 0..d-1."""
        d = values.shape[1]
        return cls(values, np.full(d, step, dtype=np.int64), np.arange(d, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def take(self, cols) -> "FeatureMatrix":
        """Column subset, tags carried along."""
        cols = np.asarray(cols, dtype=np.int64)
        return FeatureMatrix(self.values[:, cols], self.step_tags[cols], self.stream_tags[cols])

    def with_step(self, step: int) -> "FeatureMatrix":
        return FeatureMatrix(self.values, np.full(self.d, step, dtype=np.int64), self.stream_tags)
