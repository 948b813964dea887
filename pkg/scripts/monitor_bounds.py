#!/usr/bin/env python3
"""Sweep vp(H(n, k)) + k log_p n and report the running minimum.

The additive constant in the known lower bound is unspecified, so this is
a monitor, not a check: it prints the observed slack for eyeballing.

Example:
    python3 scripts/monitor_bounds.py --p 2 --k 2 --n-max 4096
"""

import argparse
import json
import math

from padicharm.valuation import vp_H_sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=int, default=2)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--n-max", type=int, default=4096)
    parser.add_argument("--every", type=int, default=256,
                        help="emit a progress row every this many n")
    args = parser.parse_args()

    vals = vp_H_sweep(args.n_max, args.k, args.p)
    best = math.inf
    arg = None
    for n in sorted(vals):
        slack = vals[n] + args.k * math.log(n, args.p)
        if slack < best:
            best, arg = slack, n
        if n % args.every == 0 or n == args.n_max:
            print(json.dumps({
                "n": n,
                "min_slack": round(best, 6),
                "argmin": arg,
            }))


if __name__ == "__main__":
    main()
