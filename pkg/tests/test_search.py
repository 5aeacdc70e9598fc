import time

import pytest
from hypothesis import given, settings, strategies as st

from msdt.dataset import DataSet
from msdt.oracle import brute_force_min_size, random_instance, random_suite
from msdt.search import (VARIANTS, DirtyPriority, SearchConfig, SearchContext, Status, Strategy,
                         _Search, greedy_upper_bound, initial_witness, min_refinements_from,
                         pick_dirty, separating_cuts, solve_bsdt, solve_msdt)
from msdt.settrie import SetTrie
from msdt.tree import is_perfect, size
from msdt.witness_tree import WitnessTree

from conftest import A, B, C, D, E, instances
from test_witness_tree import fig_tree

ALL_STRATEGIES = list(Strategy)


# -- BSDT -----------------------------------------------------------------------------


def test_bsdt_on_figure_data(fig_ds):
    # minimum size is 4 (oracle): b|c, c|d and d|e force three cuts that leave a with b
    assert brute_force_min_size(fig_ds) == 4
    assert solve_bsdt(fig_ds, 3).status is Status.NONE
    res = solve_bsdt(fig_ds, 4)
    assert res.found and size(res.tree) <= 4 and is_perfect(res.tree, fig_ds)
    assert res.witness_tree.size == size(res.tree)


def test_bsdt_single_class():
    ds = DataSet([(0,), (1,)], [1, 1])
    res = solve_bsdt(ds, 0)
    assert res.found and size(res.tree) == 0


def test_bsdt_rejects_negative_budget(fig_ds):
    with pytest.raises(ValueError):
        solve_bsdt(fig_ds, -1)


@given(instances(max_n=9))
def test_bsdt_threshold_is_oracle(ds):
    opt = brute_force_min_size(ds)
    assert solve_bsdt(ds, opt).found
    if opt:
        assert solve_bsdt(ds, opt - 1).status is Status.NONE


@given(instances(max_n=8, max_d=2), st.integers(0, 4))
def test_budget_never_exceeded(ds, s):
    seen = []
    cfg = SearchConfig(trace=lambda node, tree, dc, lb, rem: seen.append(tree.size))
    solve_bsdt(ds, s, SearchContext(cfg))
    assert all(x <= s for x in seen)


# -- MSDT -----------------------------------------------------------------------------


@pytest.mark.parametrize("strategy", ALL_STRATEGIES)
def test_msdt_figure_all_strategies(fig_ds, strategy):
    out = solve_msdt(fig_ds, SearchConfig(strategy=strategy))
    assert out.status is Status.OPTIMAL and out.size == 4
    assert is_perfect(out.tree, fig_ds) and size(out.tree) == 4


def test_msdt_opposite_pair():
    out = solve_msdt(DataSet([(0,), (1,)], [0, 1]))
    assert out.size == 1


def test_msdt_single_class_and_single_example():
    assert solve_msdt(DataSet([(0, 1), (2, 3)], [0, 0])).size == 0
    assert solve_msdt(DataSet([(5,)], [1])).size == 0


def test_msdt_twelve_examples_matches_oracle():
    ds = random_instance(12, n=12, d=3, max_value=3)
    assert solve_msdt(ds).size == brute_force_min_size(ds)


def test_msdt_max_size(fig_ds):
    out = solve_msdt(fig_ds, max_size=3)
    assert out.status is Status.NONE and out.tree is None and out.lower_bound == 4
    for strategy in ALL_STRATEGIES:
        assert solve_msdt(fig_ds, SearchConfig(strategy=strategy), max_size=4).size == 4
        assert solve_msdt(fig_ds, SearchConfig(strategy=strategy, pairlb=False),
                          max_size=3).status is Status.NONE


def test_msdt_timeout():
    ds = random_instance(7, n=30, d=6, max_value=6)
    out = solve_msdt(ds, SearchConfig(time_limit=0.0, reduce=False))
    assert out.status is Status.TIMEOUT and out.size is None


def test_bsdt_timeout_status(fig_ds):
    ctx = SearchContext(SearchConfig(), deadline=time.monotonic() - 1)
    assert solve_bsdt(fig_ds, 4, ctx).status is Status.TIMEOUT


def test_stats_are_filled(fig_ds):
    out = solve_msdt(fig_ds)
    d = out.as_dict()
    assert d["status"] == "optimal" and d["size"] == 4
    assert d["stats"]["nodes"] >= 1 and d["stats"]["bsdt_calls"] >= 1


@settings(max_examples=40)
@given(instances(max_n=10, max_d=3, max_value=3))
def test_msdt_matches_oracle_across_strategies(ds):
    opt = brute_force_min_size(ds)
    for strategy in ALL_STRATEGIES:
        out = solve_msdt(ds, SearchConfig(strategy=strategy))
        assert out.size == opt
        assert is_perfect(out.tree, ds) and size(out.tree) == opt


@settings(max_examples=25)
@given(instances(max_n=9, max_d=3, max_value=3), st.lists(st.booleans(), min_size=6, max_size=6))
def test_toggles_keep_optimum(ds, flags):
    opt = brute_force_min_size(ds)
    cfg = SearchConfig(**dict(zip(SearchConfig.TOGGLES, flags)))
    assert solve_msdt(ds, cfg).size == opt


def test_variants_agree():
    for params in random_suite(15, max_n=10):
        ds = params.build()
        sizes = {solve_msdt(ds, SearchConfig.variant(v)).size for v in VARIANTS}
        assert len(sizes) == 1


def test_variant_names():
    assert SearchConfig.variant("naive").implb is False
    assert SearchConfig.variant("naive").dirty_priority is False
    assert SearchConfig.variant("full") == SearchConfig()
    with pytest.raises(ValueError):
        SearchConfig.variant("bogus")


def test_single_improvements_only_prune():
    # bounds, constraints and cache never add nodes on this suite
    for params in random_suite(30, max_n=10):
        ds = params.build()
        for name in ("implb", "threshold_constraints", "dirty_constraints", "cache"):
            base = dict.fromkeys(SearchConfig.TOGGLES, False)
            off = solve_msdt(ds, SearchConfig(**base)).stats.nodes
            on = solve_msdt(ds, SearchConfig(**{**base, name: True})).stats.nodes
            assert on <= off, (params, name)


# -- witness and dirty example choice ---------------------------------------------------


def test_initial_witness_figure(fig_ds):
    # pairs (b,c), (c,d) and (d,e) are one cut apart; (b,c) has the lowest ids
    assert separating_cuts(fig_ds, B, C) == 1
    assert separating_cuts(fig_ds, C, D) == 1
    assert initial_witness(fig_ds) == (B, C)


def test_initial_witness_binary_dims():
    X = [(0, 0, 0, 0, 0), (1, 1, 1, 0, 0), (1, 1, 1, 1, 0), (0, 1, 1, 1, 1)]
    ds = DataSet(X, [0, 0, 1, 1])
    w, p = initial_witness(ds)
    assert (w, p) == (1, 2) and separating_cuts(ds, w, p) == 1


def test_initial_witness_single_class():
    assert initial_witness(DataSet([(0,), (1,)], [1, 1])) == (0, None)


@given(instances())
def test_initial_witness_is_minimal(ds):
    w, p = initial_witness(ds)
    best = min(separating_cuts(ds, a, b) for a in range(ds.n) for b in range(ds.n)
               if ds.labels[a] != ds.labels[b])
    assert ds.labels[w] != ds.labels[p]
    assert separating_cuts(ds, w, p) == best


def test_pick_dirty_figure(fig_ds):
    t = fig_tree(fig_ds)
    assert t.dirty_examples() == [A, D]
    assert [t.refinement_count(e) for e in (A, D)] == [4, 2]
    assert DirtyPriority(t).pick() == D
    assert pick_dirty(t) == A  # arbitrary pick: lowest id


def test_pick_dirty_single():
    ds = DataSet([(0,), (1,)], [0, 1])
    assert pick_dirty(WitnessTree(ds, 0)) == 1


def test_pick_dirty_clean_tree_raises():
    ds = DataSet([(0,), (1,)], [1, 1])
    with pytest.raises(ValueError):
        pick_dirty(WitnessTree(ds, 0))


def test_priority_cache_goes_stale(fig_ds):
    t = fig_tree(fig_ds)
    prio = DirtyPriority(t)
    r = list(t.enumerate_refinements(D))[-1]  # refine d at the root
    _, leaf = t.apply(r)
    prio.after_apply(leaf)
    # a stayed in its leaf, so its cached count is not refreshed
    assert t.refinement_count(A) == 6
    assert prio.count[A] == 4
    t.undo()
    prio.after_undo()
    assert prio.count[A] == 4


# -- greedy upper bound ---------------------------------------------------------------------


def test_greedy_separable():
    ds = DataSet([(0,), (1,), (2,), (3,)], [0, 0, 1, 1])
    assert size(greedy_upper_bound(ds)) == 1


def test_greedy_figure(fig_ds):
    tree = greedy_upper_bound(fig_ds)
    assert is_perfect(tree, fig_ds) and size(tree) >= 4


@given(instances(max_n=10))
def test_greedy_at_least_oracle(ds):
    tree = greedy_upper_bound(ds)
    assert is_perfect(tree, ds)
    assert size(tree) >= brute_force_min_size(ds)


# -- cache ---------------------------------------------------------------------------------


def cache_search(ds, s, **kw):
    cfg = SearchConfig(cache_size_divisor=1, **kw)
    ctx = SearchContext(cfg)
    return _Search(ds, s, ctx), ctx


def test_cache_probe_prunes_on_stored_bound(fig_ds):
    search, ctx = cache_search(fig_ds, 4)
    ctx.trie.insert([A, B], 5)
    assert search._cache_prunes()
    assert ctx.stats.prunes_cache == 1


def test_cache_inserts_one_at_zero_budget():
    ds = DataSet([(0,), (1,)], [0, 1])
    search, ctx = cache_search(ds, 0)
    assert search._cache_prunes()
    assert ctx.trie.lookup(ds.all_mask) == 1


def test_cache_populate_inserts_remaining_plus_one():
    ds = DataSet([(0,), (1,), (2,), (3,), (4,), (5,)], [0, 0, 1, 1, 0, 1])
    assert brute_force_min_size(ds) == 3
    search, ctx = cache_search(ds, 2)
    assert search._cache_prunes()
    assert ctx.trie.lookup(ds.all_mask) == 3
    assert search.stats.cache_nodes > 0


def test_cache_populate_remembers_feasible(fig_ds):
    search, ctx = cache_search(fig_ds, 4)
    assert not search._cache_prunes()
    assert ctx.feasible[fig_ds.all_mask] == 4
    assert len(ctx.trie) == 0


def test_empty_trie_probe_never_prunes(fig_ds):
    trie = SetTrie()
    t = fig_tree(fig_ds)
    assert not any(trie.exceeds(t.mask[v], 0) for v in t.leaves())


@given(st.lists(st.tuples(st.integers(1, 31), st.integers(1, 5)), max_size=15),
       st.integers(0, 4))
def test_cache_probe_matches_naive_scan(stored, budget):
    ds = DataSet([(0,), (1,), (2,), (3,), (4,)], [0, 1, 0, 1, 0])
    t = WitnessTree(ds, 0)
    trie = SetTrie()
    for m, b in stored:
        trie.insert(m, b)
    for v in t.leaves():
        L = t.mask[v]
        naive = any(m & ~L == 0 and b > budget for m, b in stored)
        assert trie.exceeds(L, budget) == naive


# -- trace and helpers ------------------------------------------------------------------------


def test_trace_receives_nodes(fig_ds):
    rows = []
    cfg = SearchConfig(trace=lambda node, tree, dc, lb, rem: rows.append((node, dc, lb, rem)))
    solve_bsdt(fig_ds, 4, SearchContext(cfg))
    assert rows and rows[0][0] == 1
    assert all(lb is None or lb >= 1 for _, _, lb, _ in rows)


@given(instances(max_n=8, max_d=2))
def test_min_refinements_from_root_is_oracle(ds):
    w, _ = initial_witness(ds)
    assert min_refinements_from(WitnessTree(ds, w)) == brute_force_min_size(ds)


def test_strategy_values():
    assert [s.value for s in Strategy] == ["ascending", "descending", "binary"]
    assert SearchConfig(strategy="binary").strategy == "binary"

