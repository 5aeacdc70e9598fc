#!/usr/bin/env python3
"""Node counts of the variant ladder on a seeded random suite.

Writes per-run rows as CSV and prints mean node counts plus the ratios
between neighbouring variants.

    python3 scripts/ablation.py --count 200 --out ablation.csv
"""
import argparse
import csv
import statistics
import sys

from msdt.cli import run_bench
from msdt.oracle import random_suite
from msdt.search import VARIANTS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--max-n", type=int, default=14)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--variants", default=",".join(VARIANTS))
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    variants = args.variants.split(",")
    suite = random_suite(args.count, args.start, max_n=args.max_n)
    instances = [(f"seed{sp.seed}", sp.build()) for sp in suite]
    rows, problems = run_bench(instances, variants, args.time_limit, args.jobs)

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)

    means = {}
    for v in variants:
        nodes = [r["nodes"] for r in rows if r["variant"] == v]
        solved = sum(r["solved"] for r in rows if r["variant"] == v)
        means[v] = statistics.mean(nodes)
        print(f"{v:>15}  solved {solved:>4}/{len(nodes)}  mean nodes {means[v]:12.1f}")
    for a, b in zip(variants, variants[1:]):
        print(f"{a} -> {b}: {means[a] / max(means[b], 1e-9):.2f}x fewer nodes")
    for p in problems:
        print(p, file=sys.stderr)
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
