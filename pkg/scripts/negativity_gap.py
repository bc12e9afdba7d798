"""Compare log-negativity with the certified relative-entropy bound.

Prints, per shield size, the log-negativity of the Werner-flagged pbit and
the flower state, next to their key rate and relative-entropy upper bound.
"""

import argparse
import math

from pbits.rates import certified_er_upper_bound, dw_rate, log_negativity
from pbits.security import ccq_of
from pbits.states import flower, gamma_V


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, nargs="+", default=[2, 3, 4, 5])
    args = ap.parse_args(argv)

    print(f"{'state':<8} {'d':>2} {'E_N':>9} {'log2(1+1/d)':>12} {'K_DW':>7} {'E_r <=':>7}")
    for d in args.d:
        for name, build in (("gamma_V", gamma_V), ("flower", flower)):
            if name == "flower" and d & (d - 1):
                continue  # flower needs a power of two
            rho = build(d)
            b = certified_er_upper_bound(rho)
            ub = "n/a" if b is None else f"{b.value:.4f}"
            ref = math.log2(1 + 1 / d) if name == "gamma_V" else float("nan")
            print(f"{name:<8} {d:>2} {log_negativity(rho):>9.6f} {ref:>12.6f} {dw_rate(ccq_of(rho)):>7.4f} {ub:>7}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
