"""Search for PPT inputs whose recurrence output carries distillable key.

For each number of copies m, find the cheapest (d, k) whose single-copy
state is PPT and whose output block norm clears the threshold, then report
the key-rate lower bound 1 - 16 eps next to the exact rate of the squeezed
output.

    python3 scripts/bound_key_certificate.py --p 0.3 --threshold 0.47 --m-max 12
"""

import argparse
import math

from pbits.rates import be_key_certificate, smallest_key_cell


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.3)
    ap.add_argument("--threshold", type=float, default=0.47)
    ap.add_argument("--m-max", type=int, default=12)
    args = ap.parse_args(argv)

    print(f"{'m':>3} {'d':>4} {'k':>4} {'log2 dim':>9} {'block':>9} {'1-16eps':>9} {'dw':>9} holds")
    for m in range(1, args.m_max + 1):
        cell = smallest_key_cell(args.p, m, args.threshold)
        if cell is None:
            print(f"{m:>3}  no PPT cell reaches {args.threshold}")
            continue
        d, k = cell
        c = be_key_certificate(args.p, d, k, m)
        print(
            f"{m:>3} {d:>4} {k:>4} {2 * k * math.log2(d) + 2:>9.2f} {c.block_norm:>9.6f} "
            f"{c.rate_bound:>9.4f} {c.dw_rate:>9.4f} {c.holds}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
