#!/usr/bin/env python3
"""Calibrate the single-vortex core-energy constant and write the cache.

Usage: python scripts/calibrate_gamma.py [--tol 1e-3] [--cache gamma_cache.json]
"""

import argparse

from filamentlab.gamma import core_energy_defect, estimate_gamma, save_gamma_cache


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--cache", default="gamma_cache.json")
    ap.add_argument("--epsilons", type=float, nargs="+",
                    default=[0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()

    print(f"{'eps':>8}  {'energy - pi|log eps|':>22}")
    for eps in args.epsilons:
        print(f"{eps:8.4f}  {core_energy_defect(eps):22.8f}")
    cal = estimate_gamma(tol=args.tol, epsilons=tuple(args.epsilons))
    print("extrapolated:", "  ".join(f"{v:.7f}" for v in cal.extrapolated))
    print(f"gamma = {cal.value:.7f}  (tolerance {args.tol:g})")
    save_gamma_cache(cal, args.cache)
    print(f"cached in {args.cache}")


if __name__ == "__main__":
    main()
