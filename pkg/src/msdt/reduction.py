"""Data reduction rules that keep the minimum perfect tree size unchanged.

Cuts are removed by rewriting values: dropping threshold ``v_k`` of a
dimension merges the next distinct value ``v_{k+1}`` into ``v_k``, which
leaves the left side of every other cut untouched. Every function returns
a new DataSet; inputs are never mutated.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import Cut, DataSet, bits
from .tree import DecisionTree, Leaf, Node


def _rewrite_dim(values: list[float], distinct: list[float], removed: set[int]) -> list[float]:
    """Drop the thresholds ``distinct[k]`` for ``k`` in ``removed``.

    Each value joins the block of the nearest kept threshold below it and
    takes the smallest value of that block.
    """
    if not removed:
        return values
    new_of = {}
    cur = distinct[0]
    for k, x in enumerate(distinct):
        if k > 0 and (k - 1) not in removed:
            cur = x
        new_of[x] = cur
    return [new_of[x] for x in values]


def _columns(ds: DataSet) -> list[list[float]]:
    return [[row[i] for row in ds.X] for i in range(ds.d)]


def _from_columns(ds: DataSet, cols: list[list[float]], names) -> DataSet:
    X = [tuple(c[e] for c in cols) for e in range(ds.n)] if cols else [() for _ in range(ds.n)]
    return DataSet(X, ds.labels, names)


def remove_cuts(ds: DataSet, cuts: dict[int, set[int]]) -> DataSet:
    """Remove the threshold indices ``cuts[dim]`` by value rewriting."""
    cols = _columns(ds)
    for i, ks in cuts.items():
        if ks:
            distinct = sorted(set(cols[i]))
            cols[i] = _rewrite_dim(cols[i], distinct, ks)
    return _from_columns(ds, cols, ds.feature_names)


# -- individual rules ----------------------------------------------------------


def _remove_duplicates(ds: DataSet) -> tuple[DataSet, list[int]]:
    first: dict[tuple, int] = {}
    keep: list[int] = []
    where = []
    for e, row in enumerate(ds.X):
        j = first.get(row)
        if j is None:
            j = first[row] = len(keep)
            keep.append(e)
        where.append(j)
    if len(keep) == ds.n:
        return ds, where
    return DataSet([ds.X[e] for e in keep], [ds.labels[e] for e in keep], ds.feature_names), where


def remove_duplicate_examples(ds: DataSet) -> DataSet:
    """Keep the lowest-id example of each group of identical rows."""
    return _remove_duplicates(ds)[0]


def remove_constant_dimensions(ds: DataSet) -> DataSet:
    keep = [i for i in range(ds.d) if ds.thresholds[i]]
    if len(keep) == ds.d:
        return ds
    cols = _columns(ds)
    return _from_columns(ds, [cols[i] for i in keep], [ds.feature_names[i] for i in keep])


def _pure(ds: DataSet, mask: int) -> bool:
    red, blue = ds.label_masks
    return not (mask & red) or not (mask & blue)


def dimension_reduction_cuts(ds: DataSet) -> dict[int, set[int]]:
    """Threshold indices removed by exhaustive dimension reduction.

    With ``P`` the largest index whose left side is one class, every lower
    threshold goes; with ``Q`` the smallest index whose right side is one
    class, every higher threshold goes (left rule first, so at least one
    threshold survives in every non-constant dimension).
    """
    out: dict[int, set[int]] = {}
    for i in range(ds.d):
        lms = ds.left_masks[i]
        K = len(lms)
        if K < 2:
            continue
        P = max((k for k in range(K) if _pure(ds, lms[k])), default=0)
        Q = min((k for k in range(K) if _pure(ds, ds.all_mask & ~lms[k])), default=K - 1)
        Q = max(Q, P)
        removed = set(range(P)) | set(range(Q + 1, K))
        if removed:
            out[i] = removed
    return out


def dimension_reduction(ds: DataSet) -> DataSet:
    return remove_cuts(ds, dimension_reduction_cuts(ds))


def equivalent_cut_removals(ds: DataSet) -> dict[int, set[int]]:
    """Cuts sharing a left side with a later cut (dims, then thresholds, ascending)."""
    last: dict[int, tuple[int, int]] = {}
    for i in range(ds.d):
        for k, lm in enumerate(ds.left_masks[i]):
            last[lm] = (i, k)
    out: dict[int, set[int]] = {}
    for i in range(ds.d):
        for k, lm in enumerate(ds.left_masks[i]):
            if last[lm] != (i, k):
                out.setdefault(i, set()).add(k)
    return out


def remove_equivalent_cuts(ds: DataSet) -> DataSet:
    return remove_cuts(ds, equivalent_cut_removals(ds))


def merged_values(a: list[float], b: list[float]) -> list[float] | None:
    """Counter-scheme merge of two columns, or None if no common
    non-decreasing example order exists."""
    order = sorted(range(len(a)), key=lambda e: (a[e], b[e]))
    out = [0.0] * len(a)
    counter = 0
    for prev, cur in zip(order, order[1:]):
        if b[cur] < b[prev]:
            return None
        if a[cur] > a[prev] or b[cur] > b[prev]:
            counter += 1
        out[cur] = float(counter)
    return out


def merge_dimensions(ds: DataSet) -> DataSet:
    """Merge dimension pairs admitting a common monotone order, exhaustively.

    The merged column replaces the first dimension of the pair and the
    second is dropped; pairs are rescanned from the start after each merge.
    """
    cols = _columns(ds)
    names = list(ds.feature_names)
    changed = True
    while changed:
        changed = False
        varying = [i for i in range(len(cols)) if len(set(cols[i])) > 1]
        for x, i in enumerate(varying):
            for j in varying[x + 1:]:
                m = merged_values(cols[i], cols[j])
                if m is None:
                    continue
                cols[i] = m
                names[i] = f"{names[i]}+{names[j]}"
                del cols[j], names[j]
                changed = True
                break
            if changed:
                break
    if len(cols) == ds.d and all(c == [r[i] for r in ds.X] for i, c in enumerate(cols)):
        return ds
    return _from_columns(ds, cols, names)


# -- pipeline --------------------------------------------------------------------


@dataclass
class ReductionResult:
    original: DataSet
    reduced: DataSet
    # rep[e]: id in the reduced data set of original example e
    rep: list[int]
    rounds: int = 1
    log: list[str] = field(default_factory=list)

    def stats(self) -> dict:
        return {"before": self.original.stats(), "after": self.reduced.stats()}

    def lift(self, tree: DecisionTree) -> DecisionTree:
        """Translate a tree over the reduced data into one over the original.

        Every surviving cut has the same left side (over original examples)
        as some original cut, which replaces it.
        """
        orig = self.original
        members = [0] * self.reduced.n
        for e, j in enumerate(self.rep):
            members[j] |= 1 << e
        by_mask: dict[int, Cut] = {}
        for i in range(orig.d):
            for k, lm in enumerate(orig.left_masks[i]):
                by_mask.setdefault(lm, Cut(i, orig.thresholds[i][k]))

        def walk(t: DecisionTree) -> DecisionTree:
            if isinstance(t, Leaf):
                return t
            left = 0
            for j in bits(self.reduced.left_mask(t.cut)):
                left |= members[j]
            cut = by_mask.get(left)
            if cut is None:
                raise ValueError(f"reduced cut {t.cut} has no original counterpart")
            return Node(cut, walk(t.left), walk(t.right))

        return walk(tree)


def reduce_all(ds: DataSet, max_rounds: int = 100) -> ReductionResult:
    """Apply all rules in order, repeating the whole pipeline until nothing changes."""
    rep = list(range(ds.n))
    cur = ds
    log = []
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        before = cur
        cur = dimension_reduction(cur)
        cur = remove_equivalent_cuts(cur)
        cur = merge_dimensions(cur)
        cur, where = _remove_duplicates(cur)
        rep = [where[j] for j in rep]
        cur = remove_constant_dimensions(cur)
        log.append(f"round {rounds}: n={cur.n} d={cur.d} c={cur.c}")
        if cur.X == before.X and cur.labels == before.labels:
            break
    return ReductionResult(ds, cur, rep, rounds, log)
