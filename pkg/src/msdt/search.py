"""Branch and bound over witness trees.

``solve_bsdt`` decides whether a perfect tree with at most ``s`` inner
vertices exists; ``solve_msdt`` drives it over budgets to find the minimum.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable

from .bounds import imp_lower_bound, pair_lower_bound
from .constraints import (ConstraintKind, ConstraintStore, SubsetConstraint,
                          dirty_constraint)
from .dataset import Cut, DataSet, bits
from .reduction import ReductionResult, reduce_all
from .settrie import SetTrie
from .tree import DecisionTree, Leaf, Node, size as tree_size
from .witness_tree import Refinement, WitnessTree


class Strategy(str, Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"
    BINARY = "binary"


class Status(str, Enum):
    OPTIMAL = "optimal"  # minimum size proven
    FOUND = "found"  # BSDT: tree within budget
    NONE = "none"  # BSDT: no tree within budget
    TIMEOUT = "timeout"


@dataclass
class SearchConfig:
    reduce: bool = True
    implb: bool = True
    pairlb: bool = True
    threshold_constraints: bool = True
    dirty_constraints: bool = True
    cache: bool = True
    dirty_priority: bool = True
    strategy: Strategy = Strategy.ASCENDING
    time_limit: float | None = None
    # cache population only for leaves with |L| <= min(n / divisor, max)
    cache_size_divisor: int = 4
    cache_size_max: int = 30
    cache_max_vertices: int = 2_000_000
    seed: int = 0
    # called as trace(node_id, tree, dirty_count, implb_or_None, remaining_budget)
    trace: Callable | None = field(default=None, repr=False, compare=False)

    TOGGLES = ("reduce", "implb", "pairlb", "threshold_constraints", "dirty_constraints", "cache")

    @classmethod
    def variant(cls, name: str, **kw) -> "SearchConfig":
        """Configurations of the ablation ladder."""
        off = dict(reduce=False, implb=False, pairlb=False, threshold_constraints=False,
                   dirty_constraints=False, cache=False, dirty_priority=False)
        ladder = ["naive", "dirtyepriority", "basic", "lb", "subconst", "full"]
        key = name.lower()
        if key not in ladder:
            raise ValueError(f"unknown variant {name!r}; choose from {ladder}")
        level = ladder.index(key)
        if level >= 1:
            off["dirty_priority"] = True
        if level >= 2:
            off["reduce"] = True
        if level >= 3:
            off.update(implb=True, pairlb=True)
        if level >= 4:
            off.update(threshold_constraints=True, dirty_constraints=True)
        if level >= 5:
            off["cache"] = True
        off.update(kw)
        return cls(**off)


VARIANTS = ("naive", "dirtyepriority", "basic", "lb", "subconst", "full")


@dataclass
class SearchStats:
    nodes: int = 0
    prunes_bound: int = 0
    prunes_constraint: int = 0
    prunes_cache: int = 0
    cache_inserts: int = 0
    cache_nodes: int = 0  # nodes spent in nested cache-population runs
    bsdt_calls: int = 0
    wall_time: float = 0.0
    lower_bound: int = 0
    upper_bound: int | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class _Timeout(Exception):
    pass


@dataclass
class SearchContext:
    """State shared by the BSDT calls of one solve session."""

    config: SearchConfig = field(default_factory=SearchConfig)
    stats: SearchStats = field(default_factory=SearchStats)
    trie: SetTrie | None = None
    deadline: float | None = None
    # leaf set -> smallest budget known to admit a perfect tree
    feasible: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.trie is None and self.config.cache:
            self.trie = SetTrie(self.config.cache_max_vertices)
        if self.deadline is None and self.config.time_limit is not None:
            self.deadline = time.monotonic() + self.config.time_limit


@dataclass
class BSDTResult:
    status: Status
    tree: DecisionTree | None = None
    witness_tree: WitnessTree | None = None

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND


@dataclass
class MSDTResult:
    status: Status
    tree: DecisionTree | None
    size: int | None
    lower_bound: int
    upper_bound: int | None
    stats: SearchStats
    reduction: ReductionResult | None = None

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "size": self.size,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "stats": self.stats.as_dict(),
        }


# -- witness and dirty example selection -----------------------------------------


def separating_cuts(ds: DataSet, a: int, b: int) -> int:
    ra, rb = ds.rank[a], ds.rank[b]
    return sum(abs(x - y) for x, y in zip(ra, rb))


def initial_witness(ds: DataSet) -> tuple[int, int | None]:
    """Opposite-class pair separated by the fewest cuts.

    Ties go to the lexicographically smallest (low id, high id) pair; the
    lower id becomes the witness. Returns (witness, partner) with partner
    None on single-class data.
    """
    red, blue = ds.label_masks
    if not red or not blue:
        return 0, None
    best = None
    for a in range(ds.n):
        for b in range(a + 1, ds.n):
            if ds.labels[a] == ds.labels[b]:
                continue
            key = (separating_cuts(ds, a, b), a, b)
            if best is None or key < best:
                best = key
    return best[1], best[2]


class DirtyPriority:
    """Cached refinement counts; an example's count is refreshed only when
    it lands in a newly created leaf."""

    def __init__(self, tree: WitnessTree):
        self.tree = tree
        self.count = [0] * tree.ds.n
        for e in bits(tree.dirty):
            self.count[e] = tree.refinement_count(e)
        self._trail: list[list[tuple[int, int]]] = []

    def after_apply(self, leaf: int) -> None:
        t = self.tree
        saved = []
        for e in bits(t.mask[leaf] & t.dirty):
            saved.append((e, self.count[e]))
            self.count[e] = t.refinement_count(e)
        self._trail.append(saved)

    def after_undo(self) -> None:
        for e, c in self._trail.pop():
            self.count[e] = c

    def pick(self) -> int:
        return pick_dirty(self.tree, self.count)


def pick_dirty(tree: WitnessTree, counts: list[int] | None = None) -> int:
    """Dirty example with the smallest (cached) refinement count, lowest id on ties.

    Without counts the lowest-id dirty example is returned.
    """
    d = tree.dirty
    if not d:
        raise ValueError("tree has no dirty example")
    if counts is None:
        return (d & -d).bit_length() - 1
    return min(bits(d), key=lambda e: (counts[e], e))


# -- greedy upper bound -------------------------------------------------------------


def greedy_upper_bound(ds: DataSet) -> DecisionTree:
    """CART-style greedy tree grown to purity (weighted Gini, ties by (dim, thr))."""
    red, blue = ds.label_masks

    def grow(S: int) -> DecisionTree:
        r, b = (S & red).bit_count(), (S & blue).bit_count()
        if not r or not b:
            return Leaf(ds.labels[(S & -S).bit_length() - 1])
        best = None
        for i in range(ds.d):
            for k, lm in enumerate(ds.left_masks[i]):
                L = S & lm
                if not L or L == S:
                    continue
                R = S & ~lm
                score = Fraction(0)
                for side in (L, R):
                    rr, bb = (side & red).bit_count(), (side & blue).bit_count()
                    score += Fraction(2 * rr * bb, rr + bb)
                if best is None or score < best[0]:
                    best = (score, i, k, L, R)
        if best is None:
            raise ValueError("inseparable examples; the data has conflicting duplicates")
        _, i, k, L, R = best
        return Node(Cut(i, ds.thresholds[i][k]), grow(L), grow(R))

    return grow(ds.all_mask)


# -- BSDT ----------------------------------------------------------------------------


class _Search:
    def __init__(self, ds: DataSet, s: int, ctx: SearchContext, witness: int | None = None):
        self.ds = ds
        self.s = s
        self.ctx = ctx
        self.cfg = ctx.config
        self.stats = ctx.stats
        if witness is None:
            witness = initial_witness(ds)[0] if self.cfg.dirty_priority else 0
        self.tree = WitnessTree(ds, witness)
        self.store = ConstraintStore()
        self.prio = DirtyPriority(self.tree) if self.cfg.dirty_priority else None
        self.cache_cap = min(ds.n / self.cfg.cache_size_divisor, self.cfg.cache_size_max)

    # pruning helpers

    def _bound_prunes(self) -> bool:
        t = self.tree
        remaining = self.s - t.size
        lb = None
        if self.cfg.implb and t.dirty:
            lb = imp_lower_bound(t)
        if self.cfg.trace is not None:
            self.cfg.trace(self.stats.nodes, t, t.dirty.bit_count(), lb, remaining)
        return lb is not None and lb > remaining

    def _dirty_leaves(self) -> list[int]:
        t = self.tree
        return [v for v in t.leaves() if t.mask[v] & t.dirty]

    def _cache_prunes(self) -> bool:
        t = self.tree
        trie = self.ctx.trie
        remaining = self.s - t.size
        leaves = self._dirty_leaves()
        for v in leaves:
            if trie.exceeds(t.mask[v], remaining):
                self.stats.prunes_cache += 1
                return True
        for v in leaves:
            L = t.mask[v]
            if L.bit_count() > self.cache_cap:
                continue
            known = self.ctx.feasible.get(L)
            if known is not None and known <= remaining:
                continue
            if remaining == 0:
                # a mixed leaf needs at least one more cut
                trie.insert(L, 1)
                self.stats.cache_inserts += 1
                self.stats.prunes_cache += 1
                return True
            sub = self.ds.subset(L)
            nested = SearchContext(
                replace(self.cfg, cache=False, reduce=False, trace=None),
                SearchStats(), None, self.ctx.deadline,
            )
            res = _Search(sub, remaining, nested).run()
            self.stats.cache_nodes += nested.stats.nodes
            if res.status is Status.TIMEOUT:
                raise _Timeout
            if res.found:
                self.ctx.feasible[L] = tree_size(res.tree)
                continue
            if trie.insert(L, remaining + 1):
                self.stats.cache_inserts += 1
            self.stats.prunes_cache += 1
            return True
        return False

    # main recursion

    def _constraints_for(self, r: Refinement, u: int, pre_dirty: int | None) -> list[SubsetConstraint] | None:
        """Constraints for the new vertex ``u``; None if one is born violated."""
        out = []
        if self.cfg.threshold_constraints:
            v, i, k, e = r
            ek = self.ds.rank[e][i]
            kp = k - 1 if ek <= k else k + 1
            if (ek <= k and kp >= ek) or (ek > k and kp <= ek - 1):
                lms = self.ds.left_masks[i]
                eu = self.tree.mask[u]
                members = eu & lms[k] & ~lms[kp] if ek <= k else eu & lms[kp] & ~lms[k]
                if not members:
                    return None
                out.append(SubsetConstraint(u, members, ConstraintKind.THRESHOLD, kp))
        if pre_dirty is not None:
            if not pre_dirty:
                return None
            out.append(SubsetConstraint(u, pre_dirty, ConstraintKind.DIRTY))
        return out

    def _refine(self) -> bool:
        """One search-tree node: the current tree plus everything below it."""
        t = self.tree
        self.stats.nodes += 1
        if not t.dirty:
            return True
        if t.size >= self.s:
            return False
        if self.ctx.deadline is not None and time.monotonic() > self.ctx.deadline:
            raise _Timeout
        if self._bound_prunes():
            self.stats.prunes_bound += 1
            return False
        if self.cfg.cache and self._cache_prunes():
            return False
        e = self.prio.pick() if self.prio else pick_dirty(t)
        use_constraints = self.cfg.threshold_constraints or self.cfg.dirty_constraints
        for r in list(t.enumerate_refinements(e)):
            pre_dirty = dirty_constraint(t, r) if self.cfg.dirty_constraints else None
            u, leaf = t.apply(r)
            assert t.size <= self.s
            if self.prio:
                self.prio.after_apply(leaf)
            pruned = False
            if use_constraints:
                # checked before descending, so a violating refinement spawns no node
                new = self._constraints_for(r, u, pre_dirty)
                if new is None:
                    self.store.push(u, [])
                    pruned = True
                else:
                    self.store.push(u, new)
                    pruned = self.store.on_assignment_change(t)
                if pruned:
                    self.stats.prunes_constraint += 1
            if not pruned and self._refine():
                return True
            if use_constraints:
                self.store.pop()
            if self.prio:
                self.prio.after_undo()
            t.undo()
        return False

    def run(self) -> BSDTResult:
        self.stats.bsdt_calls += 1
        try:
            ok = self._refine()
        except _Timeout:
            return BSDTResult(Status.TIMEOUT)
        if not ok:
            return BSDTResult(Status.NONE)
        return BSDTResult(Status.FOUND, self.tree.to_decision_tree(), self.tree.copy())


def solve_bsdt(ds: DataSet, s: int, ctx: SearchContext | None = None,
               witness: int | None = None) -> BSDTResult:
    """Perfect tree with at most ``s`` inner vertices on ``ds``, if one exists.

    No reduction is applied here; ``solve_msdt`` handles that.
    """
    if s < 0:
        raise ValueError("budget must be non-negative")
    ctx = ctx or SearchContext()
    return _Search(ds, s, ctx, witness).run()


def min_refinements_from(tree: WitnessTree, limit: int = 64) -> int:
    """Fewest refinements turning ``tree`` perfect (plain search, no pruning).

    ``tree`` is left unchanged.
    """
    work = tree.copy()

    def go(budget: int) -> bool:
        if not work.dirty:
            return True
        if budget == 0:
            return False
        e = pick_dirty(work)
        for r in list(work.enumerate_refinements(e)):
            work.apply(r)
            ok = go(budget - 1)
            work.undo()
            if ok:
                return True
        return False

    for j in range(limit + 1):
        if go(j):
            return j
    raise RuntimeError("refinement limit exceeded")


# -- MSDT ----------------------------------------------------------------------------


def solve_msdt(ds: DataSet, config: SearchConfig | None = None,
               max_size: int | None = None) -> MSDTResult:
    """Minimum perfect decision tree, returned over the original data set.

    With ``max_size`` the search stops above that size and reports NONE if
    no tree fits.
    """
    config = config or SearchConfig()
    start = time.monotonic()
    ctx = SearchContext(config)
    stats = ctx.stats
    red = reduce_all(ds) if config.reduce else None
    work = red.reduced if red else ds

    def finish(status, tree, lb, ub):
        stats.wall_time = time.monotonic() - start
        stats.lower_bound = lb
        stats.upper_bound = ub
        if tree is not None and red is not None:
            tree = red.lift(tree)
        size = tree_size(tree) if tree is not None and status is Status.OPTIMAL else None
        return MSDTResult(status, tree, size, lb, ub, stats, red)

    if not work.has_both_classes():
        lab = work.labels[0] if work.n else ds.labels[0] if ds.n else 0
        return finish(Status.OPTIMAL, Leaf(lab), 0, 0)

    lb = 1
    if config.pairlb:
        lb = max(lb, pair_lower_bound(work).bound)

    def bsdt(s: int) -> BSDTResult:
        return solve_bsdt(work, s, ctx)

    strategy = Strategy(config.strategy)
    cap = max_size
    if cap is not None and lb > cap:
        return finish(Status.NONE, None, lb, None)

    if strategy is Strategy.ASCENDING:
        s = lb
        while cap is None or s <= cap:
            res = bsdt(s)
            if res.status is Status.TIMEOUT:
                return finish(Status.TIMEOUT, None, s, None)
            if res.found:
                return finish(Status.OPTIMAL, res.tree, s, s)
            s += 1
        return finish(Status.NONE, None, s, None)

    best = greedy_upper_bound(work)
    ub = tree_size(best)
    if cap is not None and ub > cap:
        # the greedy tree does not fit; fall back to a capped ascending-style check
        res = bsdt(cap)
        if res.status is Status.TIMEOUT:
            return finish(Status.TIMEOUT, None, lb, None)
        if not res.found:
            return finish(Status.NONE, None, cap + 1, None)
        best, ub = res.tree, tree_size(res.tree)

    if strategy is Strategy.DESCENDING:
        s = ub - 1
        while s >= lb:
            res = bsdt(s)
            if res.status is Status.TIMEOUT:
                return finish(Status.TIMEOUT, best, lb, ub)
            if not res.found:
                break
            best, ub = res.tree, tree_size(res.tree)
            s = ub - 1
        return finish(Status.OPTIMAL, best, ub, ub)

    lo, hi = lb, ub
    while lo < hi:
        mid = (lo + hi) // 2
        res = bsdt(mid)
        if res.status is Status.TIMEOUT:
            return finish(Status.TIMEOUT, best, lo, hi)
        if res.found:
            best, hi = res.tree, tree_size(res.tree)
        else:
            lo = mid + 1
    return finish(Status.OPTIMAL, best, hi, hi)
