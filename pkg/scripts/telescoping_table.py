"""Table of s*F(s) and s*Psi_m(s) along the s -> 0 ladder.

    python3 scripts/telescoping_table.py --p 1 --m 2
"""

import argparse

from genfvt.laplace import LimitLadder, closed_form_transform, iterated_transform
from genfvt.signals import MonomialOsc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--m", type=int, default=None, help="nesting depth (default p+1, max 3)")
    args = ap.parse_args()
    m = args.m or min(args.p + 1, 3)

    model = closed_form_transform(MonomialOsc(args.p, args.omega))
    print(f"t^{args.p} sin({args.omega:g} t), m = {m}")
    print(f"{'s':>10} {'sF(s)':>14} {'sPsi_m(s)':>14} {'gap':>11}")
    for s in LimitLadder().s_values:
        a = float(model.sF(s))
        b = s * iterated_transform(model, m, s)
        print(f"{s:>10.3e} {a:>14.6e} {b:>14.6e} {abs(a - b):>11.3e}")


if __name__ == "__main__":
    main()
