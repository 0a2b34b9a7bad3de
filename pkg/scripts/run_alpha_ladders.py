#!/usr/bin/env python3
"""Compute the hole constant alpha with the double-ladder extrapolation and
print every ladder entry, the observed convergence orders and the oracle
cross-check.

Usage:
    python3 scripts/run_alpha_ladders.py [--ladder-R 4,8,16]
        [--ladder-h 0.25,0.125,0.0625] [--no-oracle] [--out alpha.json]
"""

import argparse
import json

from sidehole.alpha import estimate_alpha


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ladder-R", default="4,8,16")
    ap.add_argument("--ladder-h", default="0.25,0.125,0.0625")
    ap.add_argument("--no-oracle", action="store_true")
    ap.add_argument("--out", default=None, help="optional JSON output path")
    args = ap.parse_args()

    est = estimate_alpha(
        ladder_R=[float(x) for x in args.ladder_R.split(",")],
        ladder_h=[float(x) for x in args.ladder_h.split(",")],
        with_oracle=not args.no_oracle,
        verbose=True)

    print(f"\nR-ladder limit (h fixed):   {est.extrapolated_R:.10f} "
          f"(observed order {est.order_R:.3f})")
    print(f"h-ladder limit (R fixed):   {est.extrapolated_h:.10f} "
          f"(observed order {est.order_h:.3f})")
    print(f"nested double extrapolation: alpha = {est.alpha:.10f}")
    if est.oracle_alpha is not None:
        rel = abs(est.alpha - est.oracle_alpha) / est.oracle_alpha
        print(f"capacitance oracle:          alpha = {est.oracle_alpha:.10f} "
              f"(rel diff {rel:.4f})")
    if est.low_confidence:
        print("WARNING: observed orders outside the trusted window")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(est.to_json_dict(), f, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
