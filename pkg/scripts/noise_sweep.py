"""Sweep prediction-noise strength and compare policies against the optimum.

Writes one results CSV per run and prints, per noise width, the mean error
ratio eta/OPT and each policy's mean cost ratio to OPT.

Usage: python scripts/noise_sweep.py [--out sweep.csv] [--seeds 50] [--k 8]
"""

import argparse
import statistics
from collections import defaultdict

from predcache.cli import ExperimentConfig, emit_csv, run_experiment
from predcache.trace import NoiseSpec, WorkloadSpec

WIDTHS = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
POLICIES = ("blind_oracle", "lru", "marker", "ftl", "mw", "belady")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="noise_sweep.csv")
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--length", type=int, default=2000)
    args = parser.parse_args()

    config = ExperimentConfig(
        policies=POLICIES,
        ks=(args.k,),
        seeds=tuple(range(args.seeds)),
        workload=WorkloadSpec("zipf", universe=100, length=args.length, alpha=1.0),
        noises=tuple(NoiseSpec("additive_uniform", width=w) for w in WIDTHS),
        epsilon=0.1,
        out_path=args.out,
    )
    rows = run_experiment(config)
    emit_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}\n")

    cells = defaultdict(list)
    for row in rows:
        if row.seed is not None and row.opt > 0:
            cells[(row.noise_id, row.policy)].append(row)

    header = f"{'width':>6} {'eta/opt':>9} " + " ".join(f"{p:>12}" for p in POLICIES)
    print(header)
    for width in WIDTHS:
        noise_id = NoiseSpec("additive_uniform", width=width).label
        ratios = []
        for policy in POLICIES:
            rs = cells[(noise_id, policy)]
            ratios.append(statistics.fmean(r.cost / r.opt for r in rs))
        eps = statistics.fmean(r.eps_ratio for r in cells[(noise_id, "belady")])
        print(f"{width:6g} {eps:9.2f} " + " ".join(f"{v:12.3f}" for v in ratios))


if __name__ == "__main__":
    main()
