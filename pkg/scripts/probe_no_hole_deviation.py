#!/usr/bin/env python3
"""Grid-refinement probe of the no-hole tube eigenvalue.

For each epsilon, solve the 3-D tube (mouth + right-end Dirichlet, no hole)
at a ladder of increasing resolutions and report lambda_1 and its relative
deviation from the 1-D limit pi^2. This separates the two error sources in a
trend check: discretization error (shrinks along each row) versus the genuine
thin-domain deviation (the last column, which the continuum problem owns).

Usage:
    python3 scripts/probe_no_hole_deviation.py [--epsilons 0.4,0.3,0.2]
        [--levels 3]
"""

import argparse
import math

from sidehole.tube3d import Tube3DConfig, solve_tube

PI2 = math.pi ** 2


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilons", default="0.4,0.3,0.2")
    ap.add_argument("--levels", type=int, default=3,
                    help="refinement levels (each doubles the resolution)")
    ap.add_argument("--budget", type=int, default=2_000_000)
    args = ap.parse_args()

    for eps in (float(x) for x in args.epsilons.split(",")):
        print(f"epsilon = {eps}")
        for lvl in range(args.levels):
            cfg = Tube3DConfig(
                epsilon=eps,
                cells_across=6 * 2 ** lvl,
                max_dx=1.0 / (128 * 2 ** lvl),
                node_budget=args.budget)
            r = solve_tube(cfg, m=1)
            lam = r.eigenvalues[0]
            print(f"  level {lvl}: {r.n_nodes:8d} nodes  "
                  f"lambda_1 = {lam:.8f}  rel dev from pi^2 = "
                  f"{abs(lam - PI2) / PI2:.5f}")


if __name__ == "__main__":
    main()
