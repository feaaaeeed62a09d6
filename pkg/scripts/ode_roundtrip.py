"""Simulate t^p sin(wt) from its resonant ODE and detect m on the samples.

    python3 scripts/ode_roundtrip.py --p 1 --horizon 2000 --dt 1e-3
"""

import argparse
import time

from genfvt.lti import ic_for_pure_term, roundtrip_order_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--horizon", type=float, default=2000.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()

    t0 = time.perf_counter()
    res = roundtrip_order_check(args.p, args.omega, args.horizon, args.dt)
    print("initial conditions:", ic_for_pure_term(args.p, args.omega).tolist())
    print(f"max normalized error: {res.max_normalized_error:.3e}")
    print(f"m = {res.order.m}, limit = {res.order.limit:.3e}")
    for q, est in enumerate(res.order.per_level):
        print(f"  q={q}: {est.verdict.value}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
