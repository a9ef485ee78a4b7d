"""Graph container, Laplacians, planted-partition generation and perturbation models."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .signals import as_seed_sequence

LAPLACIAN_VARIANTS = ("combinatorial", "normalized")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected weighted graph; each edge stored once with i < j.

    Construction canonicalizes endpoint order, sorts edges, and rejects
    self-loops, duplicates, nonpositive weights and out-of-range indices, so
    symmetry holds by representation.
    """

    n: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    edge_w: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        i = np.asarray(self.edge_i, dtype=np.int64).ravel()
        j = np.asarray(self.edge_j, dtype=np.int64).ravel()
        w = np.asarray(self.edge_w, dtype=np.float64).ravel()
        if not (i.shape == j.shape == w.shape):
            raise ValueError("edge arrays must have equal length")
        if i.size:
            if i.min() < 0 or j.min() < 0 or max(i.max(), j.max()) >= self.n:
                raise ValueError("edge endpoint out of range [0, n)")
            if np.any(i == j):
                raise ValueError("self-loops are not allowed")
            if np.any(w <= 0):
                raise ValueError("edge weights must be positive")
            lo = np.minimum(i, j)
            hi = np.maximum(i, j)
            code = lo * self.n + hi
            order = np.argsort(code, kind="stable")
            code = code[order]
            if code.size > 1 and np.any(code[1:] == code[:-1]):
                raise ValueError("duplicate edges (after canonicalizing endpoint order)")
            i, j, w = lo[order], hi[order], w[order]
        object.__setattr__(self, "edge_i", i)
        object.__setattr__(self, "edge_j", j)
        object.__setattr__(self, "edge_w", w)

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return int(self.edge_i.size)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degree per node."""
        deg = np.bincount(self.edge_i, weights=self.edge_w, minlength=self.n)
        deg += np.bincount(self.edge_j, weights=self.edge_w, minlength=self.n)
        return deg

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency (both orientations materialized)."""
        rows = np.concatenate([self.edge_i, self.edge_j])
        cols = np.concatenate([self.edge_j, self.edge_i])
        vals = np.concatenate([self.edge_w, self.edge_w])
        a = sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))
        a.sort_indices()
        return a

    def edge_codes(self) -> np.ndarray:
        """Canonical pair code i*n + j per edge (i < j); sorted ascending."""
        return self.edge_i * self.n + self.edge_j


def graphs_equal(a: Graph, b: Graph) -> bool:
    return (
        a.n == b.n
        and a.m == b.m
        and np.array_equal(a.edge_i, b.edge_i)
        and np.array_equal(a.edge_j, b.edge_j)
        and np.array_equal(a.edge_w, b.edge_w)
    )


# ---------------------------------------------------------------------------
# Edge-list / label file formats
# ---------------------------------------------------------------------------

def save_edge_list(g: Graph, path) -> None:
    """Write `n m` header then one `i j w` line per edge (0-based)."""
    lines = [f"{g.n} {g.m}\n"]
    for i, j, w in zip(g.edge_i, g.edge_j, g.edge_w):
        lines.append(f"{i} {j} {float(w)!r}\n")
    with open(path, "w") as fh:
        fh.writelines(lines)


def load_edge_list(path) -> Graph:
    """Read the `n m` / `i j w` format; duplicate pairs in either orientation are rejected."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: header must be 'n m'")
        n, m = int(header[0]), int(header[1])
        ii, jj, ww = [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j w'")
            ii.append(int(parts[0]))
            jj.append(int(parts[1]))
            ww.append(float(parts[2]))
    if len(ii) != m:
        raise ValueError(f"{path}: header promises {m} edges, found {len(ii)}")
    return Graph(n, np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64),
                 np.array(ww, dtype=np.float64))


def save_labels(labels: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


def load_labels(path) -> np.ndarray:
    with open(path) as fh:
        vals = [int(line) for line in fh if line.strip()]
    return np.array(vals, dtype=np.int64)


# ---------------------------------------------------------------------------
# Planted partition (stochastic block model)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SbmParams:
    """Planted-partition parameters given by target average degree and probability ratio.

    The intra-cluster edge probability q1 solves
        s = q1 * (n/k - 1) + q2 * n*(k-1)/k,   q2 = e * q1,
    so that the expected average degree equals s; e = q2/q1 <= 1 measures how
    clusterable the graph is (smaller e, denser within clusters).
    """

    n: int
    k: int
    s: float
    e: float
    q1: float = field(init=False)
    q2: float = field(init=False)

    def __post_init__(self):
        if not (self.n >= self.k >= 1):
            raise ValueError("need n >= k >= 1")
        if not (0.0 <= self.e <= 1.0):
            raise ValueError("ratio e = q2/q1 must lie in [0, 1]")
        if self.s < 0:
            raise ValueError("average degree s must be nonnegative")
        denom = (self.n / self.k - 1.0) + self.e * self.n * (self.k - 1) / self.k
        if denom <= 0:
            raise ValueError("no vertex pairs available: increase n, k or e")
        q1 = self.s / denom
        q2 = self.e * q1
        if q1 > 1.0 + 1e-12:
            raise ValueError(
                f"derived intra-cluster probability q1={q1:.6f} exceeds 1; "
                "lower s or raise n"
            )
        object.__setattr__(self, "q1", min(q1, 1.0))
        object.__setattr__(self, "q2", min(q2, 1.0))


def planted_sizes(params: SbmParams) -> np.ndarray:
    """Cluster sizes n//k each, the first n%k clusters taking one extra node."""
    base = params.n // params.k
    sizes = np.full(params.k, base, dtype=np.int64)
    sizes[: params.n % params.k] += 1
    return sizes


def planted_labels(params: SbmParams) -> np.ndarray:
    return np.repeat(np.arange(params.k, dtype=np.int64), planted_sizes(params))


def sbm_generate(params: SbmParams, seed=0) -> tuple[Graph, np.ndarray]:
    """Draw a planted-partition graph; every vertex pair is an independent coin flip.

    Clusters are contiguous index blocks of near-equal size. Returns the graph
    and the planted labels. Deterministic given (params, seed).
    """
    rng = np.random.default_rng(as_seed_sequence(seed))
    sizes = planted_sizes(params)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    labels = planted_labels(params)

    ei, ej = [], []
    for a in range(params.k):
        oa, sa = offsets[a], sizes[a]
        iu, ju = np.triu_indices(sa, 1)
        mask = rng.random(iu.size) < params.q1
        ei.append(oa + iu[mask])
        ej.append(oa + ju[mask])
        for b in range(a + 1, params.k):
            ob, sb = offsets[b], sizes[b]
            hits = rng.random((sa, sb)) < params.q2
            ra, rb = np.nonzero(hits)
            ei.append(oa + ra)
            ej.append(ob + rb)
    i = np.concatenate(ei) if ei else np.empty(0, dtype=np.int64)
    j = np.concatenate(ej) if ej else np.empty(0, dtype=np.int64)
    g = Graph(params.n, i, j, np.ones(i.size))
    return g, labels


# ---------------------------------------------------------------------------
# Perturbation models
# ---------------------------------------------------------------------------

def _absent_pairs(g: Graph, present_codes: np.ndarray):
    """All canonical vertex pairs of g not listed in present_codes."""
    iu, ju = np.triu_indices(g.n, 1)
    codes = iu * g.n + ju
    absent = ~np.isin(codes, present_codes, assume_unique=True)
    return iu[absent], ju[absent]


def perturb_edges(g: Graph, fraction: float, params: SbmParams,
                  labels: np.ndarray, seed=0) -> Graph:
    """Redraw round(fraction*m) edges: remove uniformly, add back per the model.

    Replacement edges are drawn one by one among currently absent pairs with
    probability proportional to the model probability of the pair (q1 within a
    cluster, q2 across), via exponential-race weighted sampling without
    replacement. A just-removed pair may be redrawn. The edge count is
    preserved exactly.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    count = int(round(fraction * g.m))
    if count == 0:
        return g
    rng = np.random.default_rng(as_seed_sequence(seed))

    removed = rng.choice(g.m, size=count, replace=False)
    keep = np.ones(g.m, dtype=bool)
    keep[removed] = False
    kept_codes = g.edge_codes()[keep]

    cand_i, cand_j = _absent_pairs(g, np.sort(kept_codes))
    weights = np.where(labels[cand_i] == labels[cand_j], params.q1, params.q2)
    drawable = weights > 0
    cand_i, cand_j, weights = cand_i[drawable], cand_j[drawable], weights[drawable]
    if cand_i.size < count:
        raise ValueError("not enough admissible vertex pairs to redraw the removed edges")

    # Exponential race: top-k of log(u)/w is a sequential weighted draw without
    # replacement, matching "add edges following the model probabilities".
    keys = np.log(rng.random(cand_i.size)) / weights
    chosen = np.argpartition(keys, cand_i.size - count)[-count:]

    new_i = np.concatenate([g.edge_i[keep], cand_i[chosen]])
    new_j = np.concatenate([g.edge_j[keep], cand_j[chosen]])
    new_w = np.concatenate([g.edge_w[keep], np.ones(count)])
    return Graph(g.n, new_i, new_j, new_w)


def perturb_nodes(g: Graph, fraction: float, params: SbmParams,
                  labels: np.ndarray, seed=0) -> tuple[Graph, np.ndarray]:
    """Reassign round(fraction*n) nodes to a different cluster and rewire them.

    For every selected node: all incident edges are deleted, the label is
    resampled uniformly among the other k-1 clusters, and each pair touching a
    selected node is then drawn once, independently, with the model probability
    under the new labels. Labels outside the selection are unchanged.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if params.k < 2:
        raise ValueError("node reassignment needs k >= 2 (no other cluster exists)")
    count = int(round(fraction * g.n))
    new_labels = np.asarray(labels, dtype=np.int64).copy()
    if count == 0:
        return g, new_labels
    rng = np.random.default_rng(as_seed_sequence(seed))

    selected = np.sort(rng.choice(g.n, size=count, replace=False))
    shift = rng.integers(1, params.k, size=count)
    new_labels[selected] = (new_labels[selected] + shift) % params.k

    in_sel = np.zeros(g.n, dtype=bool)
    in_sel[selected] = True
    keep = ~(in_sel[g.edge_i] | in_sel[g.edge_j])

    # Every canonical pair with at least one selected endpoint, deduplicated.
    uu = np.repeat(selected, g.n)
    vv = np.tile(np.arange(g.n, dtype=np.int64), count)
    ok = uu != vv
    lo = np.minimum(uu[ok], vv[ok])
    hi = np.maximum(uu[ok], vv[ok])
    codes = np.unique(lo * g.n + hi)
    pi = codes // g.n
    pj = codes % g.n

    prob = np.where(new_labels[pi] == new_labels[pj], params.q1, params.q2)
    hit = rng.random(codes.size) < prob

    new_i = np.concatenate([g.edge_i[keep], pi[hit]])
    new_j = np.concatenate([g.edge_j[keep], pj[hit]])
    new_w = np.concatenate([g.edge_w[keep], np.ones(int(hit.sum()))])
    return Graph(g.n, new_i, new_j, new_w), new_labels


# ---------------------------------------------------------------------------
# Laplacians
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    """Sparse symmetric Laplacian plus a cheap upper bound on its top eigenvalue."""

    matrix: sp.csr_matrix
    variant: str
    lambda_max_bound: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def laplacian(g: Graph, variant: str = "normalized") -> LaplacianMatrix:
    """Build the combinatorial (D - W) or symmetric normalized Laplacian.

    Isolated nodes get an all-zero row in the normalized variant (pseudo-inverse
    of the degree), so each contributes a zero eigenvalue like any other
    connected component. The spectral upper bound is 2 for the normalized
    variant and twice the maximum weighted degree for the combinatorial one.
    """
    if variant not in LAPLACIAN_VARIANTS:
        raise ValueError(f"unknown Laplacian variant {variant!r}")
    w = g.adjacency
    deg = g.degrees
    if variant == "combinatorial":
        lap = sp.diags(deg) - w
        bound = 2.0 * float(deg.max()) if g.n and g.m else 0.0
    else:
        nz = deg > 0
        inv_sqrt = np.where(nz, 1.0 / np.sqrt(np.where(nz, deg, 1.0)), 0.0)
        dhalf = sp.diags(inv_sqrt)
        lap = sp.diags(nz.astype(np.float64)) - dhalf @ w @ dhalf
        bound = 2.0
    lap = sp.csr_matrix(lap)
    lap.sort_indices()
    return LaplacianMatrix(lap, variant, bound)
