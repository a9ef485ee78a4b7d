"""Experiment harness: perturbation/similarity study and the dynamic clustering study.

Both studies write sorted CSV (plus JSON-lines diagnostics for the dynamic
one), so identical config and seed give byte-identical outputs regardless of
the worker count. Replications parallelize across a process pool sized by the
CSCLUSTER_WORKERS environment variable (default 1); every replication owns its
spawned seeds.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .csc import csc_assign
from .dynamic import DynamicConfig, run_sequence
from .filters import FilterConfig
from .graphs import Graph, SbmParams, laplacian, perturb_edges, perturb_nodes, sbm_generate
from .kmeans import KmeansConfig, evaluate_on_basis, kmeans
from .signals import as_seed_sequence
from .spectral import eigendecompose, edge_similarity, perturbation_eigengap, spectral_similarity

WORKERS_ENV = "CSCLUSTER_WORKERS"

SIMILARITY_COLUMNS = ["model", "n", "k", "s", "e", "fraction", "rep", "rho", "edge_sim", "alpha"]
DYNAMIC_COLUMNS = ["p", "n", "k", "d", "t", "rep", "cost_excess", "matvecs", "refined", "wall_ms"]
STATIC_COLUMNS = ["n", "k", "s", "e", "d", "rep", "cost_excess", "ari", "matvecs", "wall_ms"]

PERTURBATION_MODELS = ("edges", "nodes", "combined")

CONFIG_SCHEMA_HELP = """\
JSON config schema (unknown keys are rejected):
{
  "kind": "similarity" | "dynamic" | "static-csc",      required
  "sbm": {"n": int, "k": int, "s": float, "e": float},  required
  "variant": "normalized" | "combinatorial",            default "normalized"
  "d": int | "30logn",                                  default "30logn"
        ("30logn" resolves to round(30 ln n), bumped to the next even number
         so a 0.5 reuse fraction splits the columns exactly)
  "k_rule": null | "2logn",        overrides sbm.k per swept n, default null
  "tau": int,                      sequence length (dynamic), default 10
  "replications": int,             default 50 (200 with --paper-scale)
  "seed": int,                     default 0
  "models": ["edges","nodes","combined"],   similarity only, default all three
  "perturbation": {"edge_fraction": float, "node_fraction": float},
                                   per-step change (dynamic), default 0.03/0.01
  "sweep": {"p": [..], "n": [..], "fractions": [..], "k": [..]},
                                   lists to sweep; empty lists mean "just the base value"
  "filter": {"order": int, "damping": "jackson"|"none", "count_tol": float,
             "width_tol": float, "max_iters": int},     optional overrides
  "kmeans": {"restarts": int, "max_iters": int, "tol": float},  optional overrides
  "oracle": bool,                  dense baseline on/off, default true
  "dense_cap": int,                oracle size guard, default 5000
  "output": {"csv": path, "diagnostics": path}          optional; CLI may override
}
"""


@dataclass(frozen=True)
class PerturbationSpec:
    edge_fraction: float = 0.03
    node_fraction: float = 0.01


@dataclass(frozen=True)
class SweepSpec:
    p: tuple = (0.5,)
    n: tuple = ()
    fractions: tuple = ()
    k: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: kind of study, base model, sweeps, replication protocol."""

    kind: str
    n: int
    k: int
    s: float
    e: float
    variant: str = "normalized"
    d: object = "30logn"
    k_rule: str | None = None
    tau: int = 10
    replications: int = 50
    seed: int = 0
    models: tuple = PERTURBATION_MODELS
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    filter: FilterConfig = field(default_factory=FilterConfig)
    kmeans: KmeansConfig = field(default_factory=KmeansConfig)
    oracle: bool = True
    dense_cap: int = 5000
    csv_path: str | None = None
    jsonl_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("similarity", "dynamic", "static-csc"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        for model in self.models:
            if model not in PERTURBATION_MODELS:
                raise ValueError(f"unknown perturbation model {model!r}")
        if self.k_rule not in (None, "2logn"):
            raise ValueError(f"unknown k rule {self.k_rule!r}")
        if not (isinstance(self.d, int) or self.d == "30logn"):
            raise ValueError("d must be an integer or the rule '30logn'")
        if self.oracle:
            for n in list(self.sweep.n) + [self.n]:
                if n > self.dense_cap:
                    raise ValueError(
                        f"oracle enabled but n={n} exceeds dense_cap={self.dense_cap}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {"kind", "sbm", "variant", "d", "k_rule", "tau", "replications",
                 "seed", "models", "perturbation", "sweep", "filter", "kmeans",
                 "oracle", "dense_cap", "output"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        try:
            sbm = data["sbm"]
            kind = data["kind"]
        except KeyError as exc:
            raise ValueError(f"missing required config key: {exc}") from None
        pert = data.get("perturbation", {})
        sweep = data.get("sweep", {})
        output = data.get("output", {})
        kwargs = dict(
            kind=kind,
            n=int(sbm["n"]), k=int(sbm["k"]), s=float(sbm["s"]), e=float(sbm["e"]),
            variant=data.get("variant", "normalized"),
            d=data.get("d", "30logn"),
            k_rule=data.get("k_rule"),
            tau=int(data.get("tau", 10)),
            replications=int(data.get("replications", 50)),
            seed=int(data.get("seed", 0)),
            models=tuple(data.get("models", PERTURBATION_MODELS)),
            perturbation=PerturbationSpec(
                edge_fraction=float(pert.get("edge_fraction", 0.03)),
                node_fraction=float(pert.get("node_fraction", 0.01)),
            ),
            sweep=SweepSpec(
                p=tuple(sweep.get("p", (0.5,))),
                n=tuple(int(v) for v in sweep.get("n", ())),
                fractions=tuple(sweep.get("fractions", ())),
                k=tuple(int(v) for v in sweep.get("k", ())),
            ),
            filter=FilterConfig(**data.get("filter", {})),
            kmeans=KmeansConfig(**data.get("kmeans", {})),
            oracle=bool(data.get("oracle", True)),
            dense_cap=int(data.get("dense_cap", 5000)),
            csv_path=output.get("csv"),
            jsonl_path=output.get("diagnostics"),
        )
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def resolve_d(d_spec, n: int) -> int:
    """Materialize the signal count: pass integers through, apply the log rule.

    The rule value is bumped to the next even integer so that reuse fraction
    0.5 splits the columns exactly in half (the matvec ledger relies on it).
    """
    if isinstance(d_spec, int):
        return d_spec
    if d_spec == "30logn":
        d = int(round(30 * math.log(n)))
        return d + (d % 2)
    raise ValueError(f"unknown d rule {d_spec!r}")


def resolve_k(cfg: ExperimentConfig, n: int) -> int:
    if cfg.k_rule == "2logn":
        return max(2, int(round(2 * math.log(n))))
    return cfg.k


# ---------------------------------------------------------------------------
# Deterministic output writers
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows) -> None:
    """Atomic CSV write; rows are dicts keyed by column name."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(row[c]) for c in columns])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path, records) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_tasks(fn, tasks):
    workers = _worker_count()
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# Perturbed graph sequences
# ---------------------------------------------------------------------------

def _perturb_combined(g: Graph, labels, params: SbmParams,
                      edge_fraction, node_fraction, seed):
    """Node reassignment first, then edge redrawing under the updated labels."""
    node_ss, edge_ss = as_seed_sequence(seed).spawn(2)
    if node_fraction > 0:
        g, labels = perturb_nodes(g, node_fraction, params, labels, node_ss)
    else:
        labels = np.asarray(labels).copy()
    if edge_fraction > 0:
        g = perturb_edges(g, edge_fraction, params, labels, edge_ss)
    return g, labels


def perturbed_sequence(params: SbmParams, tau: int, edge_fraction: float,
                       node_fraction: float, seed=0):
    """Length-tau sequence: a planted-partition graph evolving step by step.

    Returns (graphs, labels_per_step); each step relabels/rewires a node
    fraction and then redraws an edge fraction.
    """
    children = as_seed_sequence(seed).spawn(tau)
    g, labels = sbm_generate(params, children[0])
    graphs, all_labels = [g], [labels]
    for t in range(1, tau):
        g, labels = _perturb_combined(g, labels, params, edge_fraction,
                                      node_fraction, children[t])
        graphs.append(g)
        all_labels.append(labels)
    return graphs, all_labels


# ---------------------------------------------------------------------------
# Similarity study
# ---------------------------------------------------------------------------

def _similarity_task(task):
    cfg, model, n, k, fraction, rep, seed_ss = task
    params = SbmParams(n=n, k=k, s=cfg.s, e=cfg.e)
    gen_ss, pert_ss = seed_ss.spawn(2)
    g0, labels = sbm_generate(params, gen_ss)
    if model == "edges":
        g1, labels1 = perturb_edges(g0, fraction, params, labels, pert_ss), labels
    elif model == "nodes":
        g1, labels1 = perturb_nodes(g0, fraction, params, labels, pert_ss)
    else:
        g1, labels1 = _perturb_combined(g0, labels, params, fraction, fraction, pert_ss)
    la = laplacian(g0, cfg.variant)
    lb = laplacian(g1, cfg.variant)
    basis_a = eigendecompose(la, k, dense_cap=cfg.dense_cap)
    basis_b = eigendecompose(lb, k, dense_cap=cfg.dense_cap)
    return {
        "model": model, "n": n, "k": k, "s": cfg.s, "e": cfg.e,
        "fraction": fraction, "rep": rep,
        "rho": spectral_similarity(basis_a, basis_b),
        "edge_sim": edge_similarity(la, lb),
        "alpha": perturbation_eigengap(basis_a, basis_b),
    }


def run_similarity_study(cfg: ExperimentConfig):
    """Perturb planted graphs and record projector- and edge-similarity per row.

    One row per (model, n, k, fraction, replication). Requires the dense
    oracle. Writes cfg.csv_path when set; returns the sorted rows.
    """
    if not cfg.oracle:
        raise ValueError("the similarity study needs the dense oracle enabled")
    n_values = list(cfg.sweep.n) or [cfg.n]
    k_values = list(cfg.sweep.k) or [cfg.k]
    fractions = list(cfg.sweep.fractions) or [cfg.perturbation.edge_fraction]
    master = np.random.SeedSequence(cfg.seed)
    tasks = []
    index = 0
    combos = [(model, n, k, frac, rep)
              for model in cfg.models
              for n in n_values
              for k in k_values
              for frac in fractions
              for rep in range(cfg.replications)]
    children = master.spawn(len(combos))
    for (model, n, k, frac, rep), child in zip(combos, children):
        tasks.append((cfg, model, n, k, frac, rep, child))
        index += 1
    rows = _run_tasks(_similarity_task, tasks)
    rows.sort(key=lambda r: (r["model"], r["n"], r["k"], r["fraction"], r["rep"]))
    if cfg.csv_path:
        write_csv(cfg.csv_path, SIMILARITY_COLUMNS, rows)
    return rows


# ---------------------------------------------------------------------------
# Dynamic clustering study
# ---------------------------------------------------------------------------

def _dynamic_rep_task(task):
    """One replication: one graph sequence, every swept p on the same sequence."""
    cfg, rep, seed_ss = task
    k = resolve_k(cfg, cfg.n)
    d = resolve_d(cfg.d, cfg.n)
    params = SbmParams(n=cfg.n, k=k, s=cfg.s, e=cfg.e)
    seq_ss, run_ss, oracle_ss = seed_ss.spawn(3)
    graphs, _ = perturbed_sequence(params, cfg.tau, cfg.perturbation.edge_fraction,
                                   cfg.perturbation.node_fraction, seq_ss)
    run_seed = int(run_ss.generate_state(1)[0])

    bases, sc_costs = [], []
    if cfg.oracle:
        oracle_children = oracle_ss.spawn(cfg.tau)
        for g, child in zip(graphs, oracle_children):
            lap = laplacian(g, cfg.variant)
            basis = eigendecompose(lap, k, dense_cap=cfg.dense_cap)
            sc = kmeans(basis.vectors, k, cfg.kmeans, child)
            bases.append(basis)
            sc_costs.append(evaluate_on_basis(basis, sc))

    rows, records = [], []
    for p in cfg.sweep.p:
        dcfg = DynamicConfig(k=k, d=d, p=p, variant=cfg.variant,
                             filter=cfg.filter, kmeans=cfg.kmeans)
        results = run_sequence(graphs, dcfg, run_seed)
        for (assignment, diag), t in zip(results, range(1, cfg.tau + 1)):
            excess = None
            if cfg.oracle:
                cost = evaluate_on_basis(bases[t - 1], assignment)
                excess = (cost - sc_costs[t - 1]) / sc_costs[t - 1]
                diag.cost_on_basis = cost
            rows.append({
                "p": p, "n": cfg.n, "k": k, "d": d, "t": t, "rep": rep,
                "cost_excess": excess, "matvecs": diag.matvecs_total,
                "refined": diag.refined, "wall_ms": diag.wall_ms,
            })
            records.append({"p": p, "rep": rep, **diag.record()})
    return rows, records


def run_dynamic_experiment(cfg: ExperimentConfig):
    """Cluster perturbed sequences for every reuse fraction in the sweep.

    Returns (rows, diagnostics records); one row per (p, replication, step).
    The relative cost excess against the dense baseline is only filled in when
    the oracle is enabled, never imputed. Writes CSV/JSONL when paths are set.
    """
    master = np.random.SeedSequence(cfg.seed)
    children = master.spawn(cfg.replications)
    tasks = [(cfg, rep, child) for rep, child in enumerate(children)]
    results = _run_tasks(_dynamic_rep_task, tasks)
    rows = [row for rep_rows, _ in results for row in rep_rows]
    records = [rec for _, rep_recs in results for rec in rep_recs]
    rows.sort(key=lambda r: (r["p"], r["rep"], r["t"]))
    records.sort(key=lambda r: (r["p"], r["rep"], r["t"]))
    if cfg.csv_path:
        write_csv(cfg.csv_path, DYNAMIC_COLUMNS, rows)
    if cfg.jsonl_path:
        write_jsonl(cfg.jsonl_path, records)
    return rows, records


# ---------------------------------------------------------------------------
# Static study (one-shot compressive clustering across sizes)
# ---------------------------------------------------------------------------

def _static_task(task):
    cfg, n, rep, seed_ss = task
    k = resolve_k(cfg, n)
    d = resolve_d(cfg.d, n)
    params = SbmParams(n=n, k=k, s=cfg.s, e=cfg.e)
    gen_ss, run_ss, oracle_ss = seed_ss.spawn(3)
    g, labels = sbm_generate(params, gen_ss)
    lap = laplacian(g, cfg.variant)
    t0 = time.perf_counter()
    assignment, diag = csc_assign(lap, k, d, filter_cfg=cfg.filter,
                                  kmeans_cfg=cfg.kmeans, seed=int(run_ss.generate_state(1)[0]))
    wall_ms = (time.perf_counter() - t0) * 1e3
    excess = None
    if cfg.oracle:
        basis = eigendecompose(lap, k, dense_cap=cfg.dense_cap)
        sc = kmeans(basis.vectors, k, cfg.kmeans, oracle_ss)
        sc_cost = evaluate_on_basis(basis, sc)
        excess = (evaluate_on_basis(basis, assignment) - sc_cost) / sc_cost
    hits = np.bincount(labels * k + assignment.labels, minlength=k * k).reshape(k, k)
    ari = _adjusted_rand(hits)
    return {"n": n, "k": k, "s": cfg.s, "e": cfg.e, "d": d, "rep": rep,
            "cost_excess": excess, "ari": ari, "matvecs": diag.matvecs,
            "wall_ms": wall_ms}


def _adjusted_rand(contingency: np.ndarray) -> float:
    """Adjusted Rand index from a contingency table of two labelings."""
    n = contingency.sum()
    sum_comb = (contingency * (contingency - 1) / 2).sum()
    a = contingency.sum(axis=1)
    b = contingency.sum(axis=0)
    comb_a = (a * (a - 1) / 2).sum()
    comb_b = (b * (b - 1) / 2).sum()
    expected = comb_a * comb_b / (n * (n - 1) / 2)
    max_index = 0.5 * (comb_a + comb_b)
    if max_index == expected:
        return 1.0
    return float((sum_comb - expected) / (max_index - expected))


def run_static_study(cfg: ExperimentConfig):
    """One-shot compressive clustering across the n sweep; ARI against planted labels."""
    n_values = list(cfg.sweep.n) or [cfg.n]
    master = np.random.SeedSequence(cfg.seed)
    combos = [(n, rep) for n in n_values for rep in range(cfg.replications)]
    children = master.spawn(len(combos))
    tasks = [(cfg, n, rep, child) for (n, rep), child in zip(combos, children)]
    rows = _run_tasks(_static_task, tasks)
    rows.sort(key=lambda r: (r["n"], r["rep"]))
    if cfg.csv_path:
        write_csv(cfg.csv_path, STATIC_COLUMNS, rows)
    return rows
