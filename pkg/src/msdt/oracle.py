"""Reference solver and random instances for testing.

The brute-force solver is dynamic programming over example subsets and
shares no code with the witness-tree search: it derives its own cut list
straight from the raw values.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .dataset import DataSet, dedupe_conflicts

MAX_EXAMPLES = 16
MAX_CUTS = 24


class OracleGuardError(ValueError):
    pass


def _raw_cut_masks(X, n: int) -> list[int]:
    masks = set()
    d = len(X[0]) if n else 0
    for i in range(d):
        values = sorted({row[i] for row in X})
        for t in values[:-1]:
            m = 0
            for e in range(n):
                if X[e][i] <= t:
                    m |= 1 << e
            masks.add(m)
    return sorted(masks)


def brute_force_min_size(ds: DataSet, s_max: int | None = None) -> int | None:
    """Minimum number of inner vertices of a perfect tree, or None if above ``s_max``."""
    X, y = ds.X, ds.labels
    n = len(X)
    if n > MAX_EXAMPLES:
        raise OracleGuardError(f"{n} examples exceed the oracle limit of {MAX_EXAMPLES}")
    cuts = _raw_cut_masks(X, n)
    if len(cuts) > MAX_CUTS:
        raise OracleGuardError(f"{len(cuts)} cuts exceed the oracle limit of {MAX_CUTS}")
    red = sum(1 << e for e in range(n) if y[e] == 0)
    memo: dict[int, int] = {}
    INF = 10**9

    def best(S: int) -> int:
        if not (S & red) or not (S & ~red):
            return 0
        got = memo.get(S)
        if got is not None:
            return got
        value = INF
        for c in cuts:
            L = S & c
            if not L or L == S:
                continue
            value = min(value, 1 + best(L) + best(S & ~c))
        memo[S] = value
        return value

    result = best((1 << n) - 1)
    if result >= INF:
        raise ValueError("no perfect tree exists (conflicting duplicates)")
    if s_max is not None and result > s_max:
        return None
    return result


def random_instance(seed: int, n: int = 10, d: int = 3, max_value: int = 3,
                    class_balance: float = 0.5) -> DataSet:
    """Deterministic random instance with integer values in [0, max_value].

    Conflicting duplicates are dropped (first occurrence wins); draws are
    repeated until both classes and at least two distinct rows remain.
    """
    if n < 2 or d < 1 or max_value < 1:
        raise ValueError("need n >= 2, d >= 1 and max_value >= 1")
    rng = random.Random(seed)
    while True:
        X = [tuple(float(rng.randint(0, max_value)) for _ in range(d)) for _ in range(n)]
        labels = [1 if rng.random() < class_balance else 0 for _ in range(n)]
        X2, y2, _ = dedupe_conflicts(X, labels)
        if len(set(y2)) == 2:
            return DataSet(X2, y2)


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    n: int
    d: int
    max_value: int

    def build(self) -> DataSet:
        return random_instance(self.seed, self.n, self.d, self.max_value)


def random_suite(count: int = 200, start: int = 0, max_n: int = 14, max_d: int = 4,
                 max_value: int = 4) -> list[InstanceSpec]:
    """Seeded instance parameters: n in [4, max_n], d in [1, max_d], values in [0, v]."""
    out = []
    for seed in range(start, start + count):
        rng = random.Random(10_000 + seed)
        out.append(InstanceSpec(seed, rng.randint(4, max_n), rng.randint(1, max_d),
                                rng.randint(1, max_value)))
    return out
