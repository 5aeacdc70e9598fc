"""Command line entry point: ``msdt solve|reduce|verify|bench|verify-bounds``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .dataset import DataSet, InstanceError, ParseError, load_csv
from .oracle import brute_force_min_size, random_instance, random_suite
from .reduction import reduce_all
from .search import (VARIANTS, SearchConfig, SearchContext, Status, Strategy,
                     solve_bsdt, solve_msdt)
from .tree import from_json, is_perfect, to_dot, to_json

EXIT_OK, EXIT_ERROR, EXIT_TIMEOUT = 0, 1, 2

_TOGGLE_FLAGS = {
    "reduce": "--no-reduce",
    "implb": "--no-implb",
    "pairlb": "--no-pairlb",
    "threshold_constraints": "--no-threshold-constraints",
    "dirty_constraints": "--no-dirty-constraints",
    "cache": "--no-cache",
    "dirty_priority": "--no-priority",
}


def parse_seed_range(text: str) -> range:
    """``A..B`` (inclusive) or a single seed."""
    if ".." in text:
        a, b = text.split("..", 1)
        return range(int(a), int(b) + 1)
    return range(int(text), int(text) + 1)


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` file; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(value: str, current):
    if isinstance(current, bool):
        low = value.lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise ValueError(f"not a boolean: {value!r}")
        return low in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float) or current is None:
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="ascending")
    p.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")
    p.add_argument("--no-constraints", action="store_true",
                   help="disable both subset constraint families")
    for key, flag in _TOGGLE_FLAGS.items():
        p.add_argument(flag, dest=f"no_{key}", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key=value file whose entries act as flag defaults")


def config_from_args(args: argparse.Namespace) -> SearchConfig:
    kw = {key: not getattr(args, f"no_{key}") for key in _TOGGLE_FLAGS}
    if args.no_constraints:
        kw["threshold_constraints"] = kw["dirty_constraints"] = False
    return SearchConfig(strategy=Strategy(args.strategy), time_limit=args.time_limit,
                        seed=args.seed, **kw)


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    values = read_config_file(path)
    defaults = {}
    for key, value in values.items():
        if key in _TOGGLE_FLAGS:
            # file entries name the feature: implb=false means --no-implb
            defaults[f"no_{key}"] = not _coerce(value, True)
        elif hasattr(args, key):
            defaults[key] = _coerce(value, parser.get_default(key))
        else:
            raise ValueError(f"unknown config key {key!r}")
    sub = args._parser
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _load(args) -> DataSet:
    return load_csv(args.csv, class_column=args.class_column, delimiter=args.delimiter)


# -- subcommands ----------------------------------------------------------------


def cmd_solve(args) -> int:
    ds = _load(args)
    cfg = config_from_args(args)
    res = solve_msdt(ds, cfg, max_size=args.max_size)
    report = res.as_dict()
    report["instance"] = {"n": ds.n, "d": ds.d, "c": ds.c}
    if res.tree is not None:
        text = to_json(res.tree, indent=2)
        report["perfect"] = is_perfect(from_json(text), ds)
        if args.out:
            Path(args.out).write_text(text + "\n")
        if args.dot:
            Path(args.dot).write_text(to_dot(res.tree, ds.feature_names))
    if args.stats == "json":
        print(json.dumps(report, indent=2))
    else:
        size = res.size if res.size is not None else "-"
        print(f"status={res.status.value} size={size} lower_bound={res.lower_bound} "
              f"nodes={res.stats.nodes} time={res.stats.wall_time:.3f}s")
    return EXIT_TIMEOUT if res.status is Status.TIMEOUT else EXIT_OK


def _stats_line(stats: dict) -> str:
    return ",".join(f"{k}={stats[k]}" for k in ("n", "d", "c", "delta", "D"))


def cmd_reduce(args) -> int:
    ds = _load(args)
    red = reduce_all(ds)
    text = red.reduced.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"before {_stats_line(red.original.stats())} after {_stats_line(red.reduced.stats())}",
          file=sys.stderr)
    return EXIT_OK


def verify_seeds(seeds, n: int, d: int, max_value: int, solver=solve_msdt,
                 config: SearchConfig | None = None) -> list[tuple[int, int, int | None, bool]]:
    """(seed, oracle size, solver size, agrees) per seed."""
    rows = []
    for seed in seeds:
        ds = random_instance(seed, n, d, max_value)
        want = brute_force_min_size(ds)
        got = solver(ds, config or SearchConfig()).size
        rows.append((seed, want, got, got == want))
    return rows


def cmd_verify(args) -> int:
    rows = verify_seeds(parse_seed_range(args.seed_range), args.n, args.d, args.max_value,
                        config=config_from_args(args))
    print(f"{'seed':>6} {'oracle':>6} {'solver':>6}  result")
    for seed, want, got, ok in rows:
        print(f"{seed:>6} {want:>6} {str(got):>6}  {'PASS' if ok else 'FAIL'}")
    failed = sum(not r[3] for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} passed")
    return EXIT_OK if not failed else EXIT_ERROR


def _bench_instances(args) -> list[tuple[str, DataSet]]:
    if args.instances:
        paths = sorted(Path(args.instances).glob("*.csv"))
        return [(p.stem, load_csv(p)) for p in paths]
    seeds = parse_seed_range(args.seed_range)
    params = random_suite(len(seeds), seeds.start)
    return [(f"seed{sp.seed}", sp.build()) for sp in params]


def run_bench(instances, variants, time_limit, jobs: int = 1) -> tuple[list[dict], list[str]]:
    def one(item):
        name, ds, variant = item
        cfg = SearchConfig.variant(variant, time_limit=time_limit)
        t0 = time.monotonic()
        res = solve_msdt(ds, cfg)
        return {
            "instance": name, "variant": variant,
            "solved": res.status is Status.OPTIMAL,
            "time": round(time.monotonic() - t0, 4),
            "nodes": res.stats.nodes, "size": res.size,
        }

    work = [(name, ds, v) for name, ds in instances for v in variants]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(one, work))
    else:
        rows = [one(w) for w in work]
    problems = []
    by_instance: dict[str, set] = {}
    for r in rows:
        if r["solved"]:
            by_instance.setdefault(r["instance"], set()).add(r["size"])
    for name, sizes in by_instance.items():
        if len(sizes) > 1:
            problems.append(f"FAIL {name}: variants disagree on minimum size {sorted(sizes)}")
    return rows, problems


def cmd_bench(args) -> int:
    variants = args.variants.split(",") if args.variants else list(VARIANTS)
    for v in variants:
        if v.lower() not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}; choose from {', '.join(VARIANTS)}")
    rows, problems = run_bench(_bench_instances(args), variants, args.time_limit, args.jobs)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, ["instance", "variant", "solved", "time", "nodes", "size"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    for p in problems:
        print(p, file=sys.stderr)
    return EXIT_ERROR if problems else EXIT_OK


def cmd_verify_bounds(args) -> int:
    ds = _load(args) if args.csv else random_instance(args.seed, args.n, args.d, args.max_value)
    rows = []

    def trace(node, tree, dirty, lb, remaining):
        rows.append((node, dirty, lb, remaining))

    cfg = SearchConfig(reduce=False, cache=False, trace=trace)
    budget = args.budget
    if budget is None:
        budget = solve_msdt(ds, SearchConfig(reduce=False)).size
    solve_bsdt(ds, budget, SearchContext(cfg))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["node", "dirty", "implb", "remaining"])
    w.writerows(rows)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msdt", description="Minimum-size perfect decision trees")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p, required=True):
        p.add_argument("csv", nargs=None if required else "?")
        p.add_argument("--class-column", default=None)
        p.add_argument("--delimiter", default=",")

    p = sub.add_parser("solve", help="find a minimum perfect tree")
    data_args(p)
    _add_search_flags(p)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--stats", choices=["json", "text"], default="text")
    p.add_argument("--out", help="write the tree as JSON")
    p.add_argument("--dot", help="write the tree as Graphviz DOT")
    p.set_defaults(func=cmd_solve, _parser=p)

    p = sub.add_parser("reduce", help="apply the reduction rules")
    data_args(p)
    p.add_argument("--out", help="write the reduced CSV here instead of stdout")
    p.add_argument("--config")
    p.set_defaults(func=cmd_reduce, _parser=p)

    p = sub.add_parser("verify", help="compare against the brute-force oracle")
    p.add_argument("--seed-range", default="0..49")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--max-value", type=int, default=3)
    _add_search_flags(p)
    p.set_defaults(func=cmd_verify, _parser=p)

    p = sub.add_parser("bench", help="ablation table over solver variants")
    p.add_argument("--seed-range", default="0..49")
    p.add_argument("--instances", help="directory of CSV files (overrides --seed-range)")
    p.add_argument("--variants", default=None,
                   help=f"comma-separated subset of {','.join(VARIANTS)}")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench, _parser=p)

    p = sub.add_parser("verify-bounds", help="per-node ImpLB trace as CSV")
    data_args(p, required=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--max-value", type=int, default=3)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_verify_bounds, _parser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = _apply_config_file(parser, argv)
        return args.func(args)
    except (OSError, ParseError, InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
