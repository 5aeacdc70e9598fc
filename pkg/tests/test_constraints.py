from hypothesis import given, strategies as st

from msdt.constraints import (ConstraintKind, ConstraintStore, SubsetConstraint,
                              dirty_constraint, threshold_constraints)
from msdt.dataset import DataSet, to_mask
from msdt.oracle import brute_force_min_size
from msdt.search import SearchConfig, SearchContext, min_refinements_from, solve_bsdt
from msdt.witness_tree import Refinement, WitnessTree

from conftest import instances
from test_witness_tree import random_walk


def six():
    # dim 0 has distinct values {0, 2, 4, 5} so Thr = {0, 2, 4}
    X = [(0, 0), (2, 0), (2, 1), (4, 0), (5, 0), (5, 1)]
    y = [1, 0, 1, 0, 0, 0]
    return DataSet(X, y)


def test_threshold_constraints_for_earlier_thresholds():
    ds = six()
    assert ds.thresholds[0] == (0.0, 2.0, 4.0)
    t = WitnessTree(ds, 4)
    r = Refinement(0, 0, 2, 0)
    assert t.is_admissible(r)
    u, _ = t.apply(r)
    cons = threshold_constraints(t, r, u)
    assert [c.threshold_k for c in cons] == [0, 1]
    assert cons[0].members == to_mask([1, 2, 3])
    assert cons[1].members == to_mask([3])
    assert all(c.kind is ConstraintKind.THRESHOLD and c.owner == u for c in cons)


def test_closest_threshold_has_no_constraint():
    ds = six()
    t = WitnessTree(ds, 4)
    r = Refinement(0, 0, 0, 0)
    u, _ = t.apply(r)
    assert threshold_constraints(t, r, u) == []


def test_right_side_threshold_constraints():
    # mirror image: e at the top, witness at the bottom
    ds = DataSet([(-x, z) for x, z in six().X], six().labels)
    t = WitnessTree(ds, 4)
    r = Refinement(0, 0, 0, 0)
    u, _ = t.apply(r)
    cons = threshold_constraints(t, r, u)
    assert [c.threshold_k for c in cons] == [2, 1]
    assert cons[0].members == to_mask([1, 2, 3])
    assert cons[1].members == to_mask([3])


def test_dirty_constraint_members(fig_ds):
    from test_witness_tree import fig_tree

    t = fig_tree(fig_ds)
    # a is dirty below the left child; the right child holds dirty d
    r = Refinement(t.root, 0, 0, 0)
    assert dirty_constraint(t, r) == to_mask([3])
    # d refined at the root: the left child holds dirty a
    assert dirty_constraint(t, Refinement(t.root, 1, 1, 3)) == to_mask([0])
    # refinement at a leaf: rule does not apply
    assert dirty_constraint(t, Refinement(t.left[t.root], 0, 0, 0)) is None


def test_dirty_constraint_empty_when_sibling_clean():
    ds = DataSet([(0, 0), (1, 0), (0, 1), (1, 1)], [0, 1, 0, 0])
    t = WitnessTree(ds, 0)
    u, _ = t.apply(Refinement(0, 1, 0, 2))  # clean split in dim 1
    e = t.dirty_examples()[0]
    r = next(r for r in t.enumerate_refinements(e) if r.vertex == t.root)
    assert dirty_constraint(t, r) == 0


def test_violation_and_live_count():
    ds = six()
    t = WitnessTree(ds, 4)
    c = SubsetConstraint(0, to_mask([0]), ConstraintKind.DIRTY)
    assert c.live_count(t) == 1 and not c.violated(t)
    assert SubsetConstraint(0, to_mask([3]), ConstraintKind.DIRTY).live_count(t) == 1
    u, leaf = t.apply(Refinement(0, 0, 0, 0))
    # example 0 moved to the new leaf; vertex 0 keeps the rest
    assert t.mask[leaf] == 1 and t.mask[0] == ds.all_mask & ~1
    c2 = SubsetConstraint(0, to_mask([3]), ConstraintKind.DIRTY)
    assert c.violated(t) and c2.live_count(t) == 1
    assert SubsetConstraint(u, to_mask([0]), ConstraintKind.DIRTY).live_count(t) == 1
    t.undo()
    assert c.live_count(t) == 1 and not c.violated(t)


@given(instances(), st.lists(st.integers(0, 50), min_size=3, max_size=9), st.integers(1, 6))
def test_store_tracks_brute_force_counts(ds, choices, steps):
    t = WitnessTree(ds, 0)
    store = ConstraintStore()
    history = []
    for j in range(steps):
        before = t.dirty
        if not random_walk(t, choices[j:] + choices[:j], 1):
            break
        u = t.vertex_count - 2
        pick = choices[j % len(choices)]
        members = to_mask(x for x in range(ds.n) if (pick + x) % 3 == 0) & before
        store.push(u, [SubsetConstraint(u, members, ConstraintKind.DIRTY)] if members else [])
        history.append(len(store))
        counts = [bin(t.mask[c.owner] & c.members).count("1") for c in store.constraints()]
        assert store.live_counts(t) == counts
        assert store.any_violated(t) == (0 in counts)
        # the incremental check agrees with a full scan while the branch is alive
        assert store.on_assignment_change(t) == (0 in counts)
        if 0 in counts:
            break
    while history:
        history.pop()
        store.pop()
        t.undo()
        assert len(store) == (history[-1] if history else 0)


@given(instances(max_n=8))
def test_pruned_branches_hide_no_better_tree(ds):
    opt = brute_force_min_size(ds)
    pruned = []
    original = ConstraintStore.on_assignment_change

    def spy(self, tree):
        hit = original(self, tree)
        if hit:
            pruned.append(tree.copy())
        return hit

    ConstraintStore.on_assignment_change = spy
    try:
        cfg = SearchConfig(reduce=False, implb=False, pairlb=False, cache=False)
        solve_bsdt(ds, opt, SearchContext(cfg))
    finally:
        ConstraintStore.on_assignment_change = original
    for w in pruned[:5]:
        assert w.size + min_refinements_from(w) >= opt


@given(instances(), st.lists(st.integers(0, 50), min_size=2, max_size=8), st.integers(0, 4))
def test_empty_threshold_constraint_means_same_split(ds, choices, steps):
    t = WitnessTree(ds, 0)
    random_walk(t, choices, steps)
    if t.is_perfect():
        return
    e = t.dirty_examples()[choices[0] % len(t.dirty_examples())]
    for r in t.enumerate_refinements(e):
        u, _ = t.apply(r)
        for c in threshold_constraints(t, r, u):
            side = t.side_of(e, r.dim, r.k) & t.mask[u]
            closer = t.side_of(e, r.dim, c.threshold_k) & t.mask[u]
            # the closer threshold splits E[u] identically iff nothing lies between
            assert (c.members == 0) == (side == closer)
        t.undo()
