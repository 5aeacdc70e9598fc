"""Lower bounds on the number of refinements still needed.

Both bounds relax a set-cover instance. The improvement bound (per search
node) covers the dirty examples with the example sets that single
refinements would fix; the pair bound (once per solve) covers the
opposite-class pairs sharing a leaf with the pair sets that single cuts
separate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import DataSet, bits
from .witness_tree import Refinement, WitnessTree

# returned when some dirty example cannot be fixed by any refinement
INFEASIBLE = 1 << 30

LP_GUARD = 1e-6


def imp_set_of(tree: WitnessTree, r: Refinement, dirty_subset: int | None = None) -> int:
    """Members of ``dirty_subset`` that ``r`` would classify correctly."""
    if dirty_subset is None:
        dirty_subset = tree.dirty
    v, i, k, e = r
    side = tree.mask[v] & tree.side_of(e, i, k)
    return dirty_subset & side & tree.ds.label_masks[tree.ds.labels[e]]


def _cover_count(sizes: list[int], target: int) -> int:
    """Fewest of the largest ``sizes`` whose sum reaches ``target``."""
    total = 0
    for j, s in enumerate(sorted(sizes, reverse=True)):
        total += s
        if total >= target:
            return j + 1
    return INFEASIBLE


def size_cover_bound(universe_size: int, sizes: list[int]) -> int:
    """Lower bound for set cover from set sizes alone."""
    if universe_size <= 0:
        return 0
    return _cover_count(sizes, universe_size)


def imp_set_sizes(tree: WitnessTree, v: int, skip_parent_dominated: bool = True) -> list[int]:
    """Sizes of the distinct imp sets of refinements applied at vertex ``v``.

    Refinements at ``v`` with the same cut, the same side and the same
    example class have identical imp sets, so each such group contributes a
    single set.
    """
    ds = tree.ds
    ev = tree.mask[v]
    dv = tree.dirty & ev
    if not dv:
        return []
    wv = tree.witnesses & ev
    p = tree.parent[v]
    if skip_parent_dominated and p >= 0:
        ep = tree.mask[p]
        wp = tree.witnesses & ep
    else:
        ep = wp = 0
    check_parent = skip_parent_dominated and p >= 0
    red, blue = ds.label_masks
    out = []
    for i in range(ds.d):
        for lm in ds.left_masks[i]:
            for left_side in (True, False):
                side = ev & lm if left_side else ev & ~lm
                if side & wv:
                    continue
                ds_ = dv & side
                if not ds_:
                    continue
                if check_parent:
                    pside = ep & lm if left_side else ep & ~lm
                    if not (pside & wp):
                        # same refinement admissible one level up; its imp set is a superset
                        continue
                m = (ds_ & red).bit_count()
                if m:
                    out.append(m)
                m = (ds_ & blue).bit_count()
                if m:
                    out.append(m)
    return out


def imp_queues(tree: WitnessTree, improvement1: bool = True,
               improvement2: bool = True) -> dict[int, list[int]]:
    """Retained imp-set sizes per vertex, merged bottom-up (descending order).

    Each vertex collects its own imp-set sizes plus its children's; with
    improvement 2 it keeps only the largest ones needed to reach the number
    of dirty examples in its subtree.
    """
    dirty = tree.dirty
    out: dict[int, list[int]] = {}

    def collect(v: int) -> list[int]:
        sizes: list[int] = []
        if tree.left[v] >= 0:
            sizes = collect(tree.left[v]) + collect(tree.right[v])
        sizes += imp_set_sizes(tree, v, improvement1)
        sizes.sort(reverse=True)
        if improvement2:
            need = (dirty & tree.mask[v]).bit_count()
            total = 0
            for j, s in enumerate(sizes):
                total += s
                if total >= need:
                    del sizes[j + 1:]
                    break
        out[v] = sizes
        return list(sizes)

    collect(tree.root)
    return out


def imp_lower_bound(tree: WitnessTree, improvement1: bool = True, improvement2: bool = True) -> int:
    """Improvement lower bound on the refinements still needed.

    Returns INFEASIBLE when the retained sizes cannot reach the number of
    dirty examples.
    """
    if not tree.dirty:
        return 0
    root_sizes = imp_queues(tree, improvement1, improvement2)[tree.root]
    return size_cover_bound(tree.dirty.bit_count(), root_sizes)


# -- pair bound ---------------------------------------------------------------


def opposite_pairs(tree: WitnessTree) -> list[tuple[int, int]]:
    """Pairs(W): opposite-class examples sharing a leaf, as (red, blue)."""
    red, blue = tree.ds.label_masks
    out = []
    for leaf in tree.leaves():
        m = tree.mask[leaf]
        bl = list(bits(m & blue))
        for a in bits(m & red):
            out.extend((a, b) for b in bl)
    return out


def pairsplit_family(ds: DataSet, tree: WitnessTree | None = None) -> list[frozenset]:
    """Distinct non-empty pair sets split by refinements at the root.

    A refinement at the root with cut (i, t) separates exactly the pairs
    lying on different sides of the cut; refinements deeper in the tree
    split subsets of these.
    """
    if tree is None:
        tree = WitnessTree(ds, 0)
    pairs = opposite_pairs(tree)
    family: dict[frozenset, None] = {}
    for i in range(ds.d):
        for lm in ds.left_masks[i]:
            split = frozenset(
                frozenset(p) for p in pairs if ((lm >> p[0]) & 1) != ((lm >> p[1]) & 1)
            )
            if split:
                family.setdefault(split, None)
    return list(family)


@dataclass
class PairBound:
    bound: int
    lp_value: float | None
    greedy_bound: int
    pairs: int
    sets: int
    backend: str
    fallback: bool = False
    meta: dict = field(default_factory=dict)


def _incidence(ds: DataSet, tree: WitnessTree) -> tuple[np.ndarray, int]:
    pairs = opposite_pairs(tree)
    if not pairs:
        return np.zeros((0, 0), dtype=bool), 0
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    cols = []
    for i in range(ds.d):
        col_vals = np.array([x[i] for x in ds.X])
        for t in ds.thresholds[i]:
            left = col_vals <= t
            cols.append(left[a] != left[b])
    if not cols:
        return np.zeros((len(pairs), 0), dtype=bool), len(pairs)
    A = np.stack(cols, axis=1)
    A = A[:, A.any(axis=0)]
    # identical columns are interchangeable; identical rows are one constraint
    A = np.unique(A, axis=1)
    A = np.unique(A, axis=0)
    return A, len(pairs)


def greedy_dual_bound(A: np.ndarray) -> int:
    """Dual-feasible bound: each pair pays 1 / (largest set containing it)."""
    if A.shape[0] == 0:
        return 0
    sizes = A.sum(axis=0)
    if (~A.any(axis=1)).any():
        return INFEASIBLE
    y = 1.0 / np.where(A, sizes[None, :], 0).max(axis=1)
    crude = math.ceil(A.shape[0] / sizes.max() - LP_GUARD)
    return max(crude, math.ceil(float(y.sum()) - LP_GUARD))


def scipy_lp(A: np.ndarray) -> float:
    from scipy.optimize import linprog

    m, k = A.shape
    res = linprog(
        c=np.ones(k),
        A_ub=-A.astype(float),
        b_ub=-np.ones(m),
        bounds=[(0.0, 1.0)] * k,
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return float(res.fun)


LPBackend = Callable[[np.ndarray], float]


def pair_lower_bound(
    ds: DataSet, tree: WitnessTree | None = None, lp: LPBackend | None = scipy_lp
) -> PairBound:
    """Pair lower bound from the LP relaxation of the root pair-cover instance.

    Without an LP backend, or when it fails, the greedy dual bound is used.
    """
    if tree is None:
        tree = WitnessTree(ds, 0)
    A, npairs = _incidence(ds, tree)
    if A.shape[0] == 0:
        return PairBound(0, 0.0, 0, 0, 0, "trivial")
    greedy = greedy_dual_bound(A)
    if greedy >= INFEASIBLE:
        raise ValueError("some opposite-class pair cannot be separated by any cut")
    if lp is None:
        return PairBound(greedy, None, greedy, npairs, A.shape[1], "greedy-dual")
    try:
        value = lp(A)
    except Exception as exc:  # noqa: BLE001 - any backend failure falls back
        return PairBound(greedy, None, greedy, npairs, A.shape[1], "greedy-dual", True,
                         {"error": str(exc)})
    bound = max(math.ceil(value - LP_GUARD), greedy)
    return PairBound(bound, value, greedy, npairs, A.shape[1], "lp")
