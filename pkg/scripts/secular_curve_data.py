#!/usr/bin/env python3
"""Emit plot-ready data for the secular quotient f_a(mu) =
-mu sin(mu) / (sin(mu a) sin(mu (1-a))) together with the computed roots of
F(mu) = mu sin(mu) + kappa sin(mu a) sin(mu (1-a)): the eigenfrequencies are
where the curve crosses the horizontal line f_a = kappa.

Usage:
    python3 scripts/secular_curve_data.py [--a 0.7] [--kappa 5.0]
        [--count 6] [--out curve.csv]
"""

import argparse
import math

import numpy as np

from sidehole.secular import SecularProblem, find_roots


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=0.7)
    ap.add_argument("--kappa", type=float, default=5.0)
    ap.add_argument("--count", type=int, default=6)
    ap.add_argument("--pole-margin", type=float, default=0.02)
    ap.add_argument("--out", default="curve.csv")
    args = ap.parse_args()

    problem = SecularProblem(a=args.a, kappa=args.kappa)
    spec = find_roots(problem, args.count)
    print("roots mu_k: " + ", ".join(f"{mu:.10f}" for mu in spec.mu_list))

    hi = (args.count + 1) * math.pi
    mus = np.linspace(1e-6, hi, int(400 * hi / math.pi))
    denom = np.sin(mus * args.a) * np.sin(mus * (1 - args.a))
    keep = np.abs(denom) > args.pole_margin
    with open(args.out, "w") as f:
        f.write(f"# a={args.a} kappa={args.kappa}\n")
        f.write("# roots: " + " ".join(f"{mu:.12g}" for mu in spec.mu_list) + "\n")
        f.write("mu,f_a\n")
        for mu, d in zip(mus[keep], denom[keep]):
            f.write(f"{mu:.12g},{-mu * math.sin(mu) / d:.12g}\n")
    print(f"wrote {args.out} ({int(keep.sum())} samples, poles masked at "
          f"|sin(mu a) sin(mu(1-a))| <= {args.pole_margin})")


if __name__ == "__main__":
    main()
