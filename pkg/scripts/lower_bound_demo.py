"""Drive deterministic policies through the adaptive lower-bound construction.

For each (policy, k, j) the table shows the forced cost, the offline optimum
on the generated trace, the realized prediction error, and whether the
lower-bound certificate alg >= 2P + P*(j-1) holds.

Usage: python scripts/lower_bound_demo.py [--phases 10]
"""

import argparse

from predcache import AdversaryConfig, certify_lower_bound, run_adversary

POLICIES = ("lru", "blind_oracle", "ftl")
GRID = [(3, 1), (3, 2), (5, 2), (5, 4), (8, 4), (8, 7)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--phases", type=int, default=10)
    args = parser.parse_args()

    print(f"{'policy':>12} {'k':>3} {'j':>3} {'alg':>6} {'opt':>5} "
          f"{'required':>9} {'eta':>8} {'eta/phase':>10} {'cert':>5}")
    for policy in POLICIES:
        for k, j in GRID:
            config = AdversaryConfig(k=k, j=j, num_phases=args.phases)
            result = run_adversary(policy, config)
            record = certify_lower_bound(result)
            per_phase_eta = max(p.eta for p in result.phases[:-1] or result.phases)
            print(
                f"{policy:>12} {k:3d} {j:3d} {result.alg_cost:6d} {result.opt_cost:5d} "
                f"{record.lhs:9.0f} {result.eta:8.0f} {per_phase_eta:10.0f} "
                f"{'ok' if record.passed else 'FAIL':>5}"
            )


if __name__ == "__main__":
    main()
