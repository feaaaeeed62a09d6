"""Minimal averaging order for t^p sin(wt) over a grid of p and w.

    python3 scripts/order_sweep.py --p-max 3 --omegas 1 2
"""

import argparse
import math
import time

from genfvt.convergence import minimal_order_for_spec
from genfvt.signals import MonomialOsc, UniformGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-max", type=int, default=3)
    ap.add_argument("--omegas", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--periods", type=float, default=4000.0)
    ap.add_argument("--dt", type=float, default=1e-2)
    ap.add_argument("--q-max", type=int, default=6)
    args = ap.parse_args()

    print(f"{'p':>2} {'omega':>6} {'m':>3} {'limit':>12} {'certified':>9} {'seconds':>8}")
    for p in range(args.p_max + 1):
        for omega in args.omegas:
            grid = UniformGrid.from_horizon(args.dt, args.periods * 2 * math.pi / omega)
            t0 = time.perf_counter()
            rep = minimal_order_for_spec(MonomialOsc(p, omega), grid, args.q_max)
            dt = time.perf_counter() - t0
            limit = f"{rep.limit:.3e}" if rep.found else "-"
            print(f"{p:>2} {omega:>6g} {str(rep.m):>3} {limit:>12} {str(rep.certified):>9} {dt:>8.2f}")


if __name__ == "__main__":
    main()
