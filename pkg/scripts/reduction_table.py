#!/usr/bin/env python3
"""Instance sizes before and after the reduction rules.

Takes CSV files, or a seeded random suite when none are given, and prints
one row per instance with n, d, c, delta and D before and after.

    python3 scripts/reduction_table.py data/*.csv
"""
import argparse
import sys
from pathlib import Path

from msdt.dataset import load_csv
from msdt.oracle import random_instance
from msdt.reduction import reduce_all

COLS = ("n", "d", "c", "delta", "D")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="*")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--max-value", type=int, default=4)
    args = ap.parse_args(argv)

    if args.files:
        data = [(Path(f).stem, load_csv(f)) for f in args.files]
    else:
        data = [(f"seed{s}", random_instance(s, args.n, args.d, args.max_value))
                for s in range(args.count)]

    head = " ".join(f"{c:>6}" for c in COLS)
    print(f"{'instance':<16} {head}   | {head}   rounds")
    for name, ds in data:
        res = reduce_all(ds)
        a, b = res.original.stats(), res.reduced.stats()
        left = " ".join(f"{a[c]:>6}" for c in COLS)
        right = " ".join(f"{b[c]:>6}" for c in COLS)
        print(f"{name:<16} {left}   | {right}   {res.rounds:>6}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
