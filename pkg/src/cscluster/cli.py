"""Command-line interface: graph generation, perturbation, clustering, benchmarks.

Exit codes: 0 success, 1 usage/config error, 2 runtime error. Outputs are
written atomically and deterministically (same flags, same bytes).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile

import numpy as np

from . import bench
from .csc import csc_assign
from .dynamic import DynamicConfig, run_sequence
from .filters import FilterConfig
from .graphs import (SbmParams, laplacian, load_edge_list, load_labels,
                     perturb_edges, perturb_nodes, save_edge_list, save_labels,
                     sbm_generate)
from .kmeans import KmeansConfig
from .spectral import (edge_similarity, eigendecompose, perturbation_eigengap,
                       sc_assign, spectral_similarity)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        _atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cscluster",
                     description="Spectral clustering from filtered random signals, "
                                 "with feature reuse across graph sequences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="draw a planted-partition graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=float, required=True, help="target average degree")
    p.add_argument("--e", type=float, required=True, help="inter/intra probability ratio")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="edge-list file to write")
    p.add_argument("--labels-out", help="write planted labels here")

    p = sub.add_parser("perturb", help="perturb a graph under the planted model")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--e", type=float, required=True)
    p.add_argument("--edge-fraction", type=float, default=0.0)
    p.add_argument("--node-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--labels-out")

    for name in ("cluster-sc", "cluster-csc"):
        p = sub.add_parser(name, help="cluster one graph "
                           + ("(dense eigenvector baseline)" if name == "cluster-sc"
                              else "(filtered random signals)"))
        p.add_argument("--graph", required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--variant", choices=("normalized", "combinatorial"),
                       default="normalized")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("-o", "--output", required=True)
        if name == "cluster-csc":
            p.add_argument("--d", type=int, required=True, help="number of random signals")
            p.add_argument("--order", type=int, default=100, help="filter polynomial order")

    p = sub.add_parser("cluster-dynamic", help="cluster a graph sequence with feature reuse")
    p.add_argument("--graphs", nargs="+", required=True, help="edge-list files, in time order")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5, help="reuse fraction in [0, 0.5]")
    p.add_argument("--variant", choices=("normalized", "combinatorial"), default="normalized")
    p.add_argument("--order", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--diagnostics", help="JSON-lines per-step run log")

    p = sub.add_parser("similarity", help="projector- and edge-similarity of two graphs")
    p.add_argument("--graph-a", required=True)
    p.add_argument("--graph-b", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--variant", choices=("normalized", "combinatorial"), default="normalized")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")

    p = sub.add_parser("bench", help="run a configured experiment study")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--paper-scale", action="store_true",
                   help="restore 200 replications regardless of the config")
    p.add_argument("--csv", help="override the CSV output path")
    p.add_argument("--diagnostics", help="override the JSON-lines output path")
    return parser


def _cmd_generate(args) -> int:
    params = SbmParams(n=args.n, k=args.k, s=args.s, e=args.e)
    g, labels = sbm_generate(params, args.seed)
    save_edge_list(g, args.output)
    if args.labels_out:
        save_labels(labels, args.labels_out)
    print(f"wrote {args.output}: n={g.n} m={g.m}")
    return 0


def _cmd_perturb(args) -> int:
    g = load_edge_list(args.graph)
    labels = load_labels(args.labels)
    if labels.size != g.n:
        raise ValueError("label file length does not match the graph")
    k = int(labels.max()) + 1
    params = SbmParams(n=g.n, k=k, s=args.s, e=args.e)
    ss = np.random.SeedSequence(args.seed)
    node_ss, edge_ss = ss.spawn(2)
    if args.node_fraction > 0:
        g, labels = perturb_nodes(g, args.node_fraction, params, labels, node_ss)
    if args.edge_fraction > 0:
        g = perturb_edges(g, args.edge_fraction, params, labels, edge_ss)
    save_edge_list(g, args.output)
    if args.labels_out:
        save_labels(labels, args.labels_out)
    print(f"wrote {args.output}: n={g.n} m={g.m}")
    return 0


def _cmd_cluster_sc(args) -> int:
    g = load_edge_list(args.graph)
    lap = laplacian(g, args.variant)
    assignment = sc_assign(lap, args.k, KmeansConfig(restarts=args.restarts), args.seed)
    _emit_json({
        "n": g.n, "k": args.k, "variant": args.variant, "seed": args.seed,
        "labels": assignment.labels.tolist(),
        "cost": assignment.feature_cost,
    }, args.output)
    return 0


def _cmd_cluster_csc(args) -> int:
    g = load_edge_list(args.graph)
    lap = laplacian(g, args.variant)
    assignment, diag = csc_assign(
        lap, args.k, args.d,
        filter_cfg=FilterConfig(order=args.order),
        kmeans_cfg=KmeansConfig(restarts=args.restarts),
        seed=args.seed,
    )
    _emit_json({
        "n": g.n, "k": args.k, "d": args.d, "variant": args.variant, "seed": args.seed,
        "labels": assignment.labels.tolist(),
        "cost": assignment.feature_cost,
        "lambda_k": diag.lambda_k,
        "matvecs": diag.matvecs,
        "dichotomy_iters": diag.search_iters,
    }, args.output)
    return 0


def _cmd_cluster_dynamic(args) -> int:
    graphs = [load_edge_list(path) for path in args.graphs]
    cfg = DynamicConfig(k=args.k, d=args.d, p=args.p, variant=args.variant,
                        filter=FilterConfig(order=args.order),
                        kmeans=KmeansConfig(restarts=args.restarts))
    results = run_sequence(graphs, cfg, args.seed)
    steps = []
    for assignment, diag in results:
        steps.append({
            "t": diag.t,
            "labels": assignment.labels.tolist(),
            "cost": assignment.feature_cost,
            "lambda_k": diag.lambda_k,
            "refined": diag.refined,
            "matvecs": diag.matvecs_total,
            "reused": diag.reused,
        })
    _emit_json({"n": graphs[0].n, "k": args.k, "d": args.d, "p": args.p,
                "seed": args.seed, "steps": steps}, args.output)
    if args.diagnostics:
        bench.write_jsonl(args.diagnostics, [diag.record() for _, diag in results])
    return 0


def _cmd_similarity(args) -> int:
    ga = load_edge_list(args.graph_a)
    gb = load_edge_list(args.graph_b)
    la = laplacian(ga, args.variant)
    lb = laplacian(gb, args.variant)
    basis_a = eigendecompose(la, args.k)
    basis_b = eigendecompose(lb, args.k)
    _emit_json({
        "n": ga.n, "k": args.k, "variant": args.variant,
        "rho": spectral_similarity(basis_a, basis_b),
        "edge_similarity": edge_similarity(la, lb),
        "alpha": perturbation_eigengap(basis_a, basis_b),
    }, args.output)
    return 0


def _cmd_bench(args) -> int:
    try:
        cfg = bench.ExperimentConfig.from_json_file(args.config)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}\n\n{bench.CONFIG_SCHEMA_HELP}")
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.paper_scale:
        updates["replications"] = 200
    if args.csv:
        updates["csv_path"] = args.csv
    if args.diagnostics:
        updates["jsonl_path"] = args.diagnostics
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    if cfg.kind == "similarity":
        rows = bench.run_similarity_study(cfg)
    elif cfg.kind == "dynamic":
        rows, _ = bench.run_dynamic_experiment(cfg)
    else:
        rows = bench.run_static_study(cfg)
    dest = cfg.csv_path or "(no csv path configured)"
    print(f"{cfg.kind}: {len(rows)} rows -> {dest}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "perturb": _cmd_perturb,
    "cluster-sc": _cmd_cluster_sc,
    "cluster-csc": _cmd_cluster_csc,
    "cluster-dynamic": _cmd_cluster_dynamic,
    "similarity": _cmd_similarity,
    "bench": _cmd_bench,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse -h / --help
        code = exc.code
        return int(code) if code else 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
