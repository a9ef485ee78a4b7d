#!/usr/bin/env python3
"""Perturbation sweeps: how fast do the spectral subspaces of a planted graph drift?

Runs three sweeps (perturbation fraction, cluster count, graph size) and
writes one CSV per sweep. Medians printed at the end summarize the trends.
"""
import argparse
import os

import numpy as np

from cscluster import ExperimentConfig, FilterConfig, KmeansConfig, run_similarity_study
from cscluster.bench import SweepSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--replications", type=int, default=15)
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    base = dict(kind="similarity", s=25.0, e=1 / 6, models=("edges",),
                filter=FilterConfig(), kmeans=KmeansConfig())
    sweeps = {
        "fraction": ExperimentConfig(
            n=300, k=4, replications=args.replications, seed=args.seed,
            sweep=SweepSpec(fractions=(0.01, 0.03, 0.1)),
            csv_path=os.path.join(args.out_dir, "similarity_fraction.csv"), **base),
        "k": ExperimentConfig(
            n=300, k=4, replications=args.replications, seed=args.seed + 1,
            sweep=SweepSpec(k=(2, 4, 8), fractions=(0.05,)),
            csv_path=os.path.join(args.out_dir, "similarity_k.csv"), **base),
        "n": ExperimentConfig(
            n=200, k=8, replications=max(args.replications, 30), seed=args.seed + 2,
            sweep=SweepSpec(n=(200, 400, 800), fractions=(0.15,)),
            csv_path=os.path.join(args.out_dir, "similarity_n.csv"), **base),
    }
    for column, cfg in sweeps.items():
        rows = run_similarity_study(cfg)
        levels = sorted({row[column] for row in rows})
        medians = [np.median([r["rho"] for r in rows if r[column] == lv]) for lv in levels]
        summary = ", ".join(f"{lv}: {med:.3f}" for lv, med in zip(levels, medians))
        print(f"{column} sweep -> {cfg.csv_path}\n  median similarity by {column}: {summary}")


if __name__ == "__main__":
    main()
