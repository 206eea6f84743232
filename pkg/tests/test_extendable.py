import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hamres.certify import CERTIFIED, REFUTED
from hamres.digraph import Digraph, verify_path
from hamres.errors import InputError, StageFailure
from hamres.extendable import (BipartitePair, ConnectProfile, ExtendableForest, alternates, connect_pair,
                               extend_leaf, extend_tree, g_budget, is_extendable, kary_tree, remove_leaf,
                               shape_size, split_five, strong_connect, weak_connect)
from hamres.process import sample_gnp


def oracle_extendable(F: ExtendableForest, pair: BipartitePair) -> bool:
    """Set-based restatement of the four conditions, every U enumerated."""
    d, m = F.d, F.m
    used = F.vertices
    if any(F.degree(v) > d for v in used):
        return False
    if any(r not in pair.A1 for r in F.roots):
        return False
    for p, c in F.edges():
        i = 1 if F.depth(p) % 2 == 0 else 2
        if p not in pair.cls(i) or c not in pair.nbrs(p, i):
            return False
    for i in (1, 2):
        Ai, other = sorted(pair.cls(i)), pair.cls(3 - i)
        for s in range(1, len(Ai) + 1):
            for U in itertools.combinations(Ai, s):
                N = set().union(*(pair.nbrs(u, i) for u in U))
                if s <= 2 * m:
                    kids = sum(len(F.children.get(u, ())) for u in U if u in F and F.label(u) == i)
                    if len((N & other) - used) < d * s - kids:
                        return False
                if s >= m and 2 * len(N & other) < len(other):
                    return False
    return True


def random_forest(pair, d, m, seed, steps):
    F = ExtendableForest.empty([0], d, m)
    for k in range(steps):
        grow = [v for v in sorted(F.vertices) if F.degree(v) < d]
        if not grow:
            break
        v = grow[(seed + k) % len(grow)]
        i = F.label(v)
        free = sorted(pair.nbrs(v, i) - F.vertices)
        if free:
            F.add_leaf(v, free[0])
    return F


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.sampled_from([0.6, 0.8, 0.95]), st.integers(0, 3), st.sampled_from([1, 2]))
def test_exhaustive_checker_matches_oracle(seed, p, steps, d):
    pair = BipartitePair.random(5, p, seed)
    F = random_forest(pair, d, 1, seed, steps)
    cert = is_extendable(F, pair, "exhaustive")
    assert cert.verdict in (CERTIFIED, REFUTED)
    assert (cert.verdict == CERTIFIED) == oracle_extendable(F, pair)


def test_structural_refutes_bad_root():
    pair = BipartitePair.random(4, 1.0, 0)
    F = ExtendableForest.empty([5], 1, 1)
    assert is_extendable(F, pair, "structural").verdict == REFUTED


def test_unknown_mode_rejected():
    pair = BipartitePair.random(4, 1.0, 0)
    with pytest.raises(InputError):
        is_extendable(ExtendableForest.empty([0], 1, 1), pair, "bogus")


def test_forest_bookkeeping():
    F = ExtendableForest.empty([0], 2, 1)
    F.add_leaf(0, 10)
    F.add_leaf(10, 1)
    assert F.depth(1) == 2 and F.root_of(1) == 0 and F.path_to_root(1) == [0, 10, 1]
    assert F.label(0) == 1 and F.label(10) == 2
    with pytest.raises(InputError):
        F.drop_leaf(10)
    G = remove_leaf(F, 1)
    assert 1 not in G and 1 in F


def test_shapes():
    assert shape_size(kary_tree(2, 3)) == 15
    assert kary_tree(3, 0) == ()


def test_leaf_removal_preserves_certificate():
    """Grow certified trees on complete pairs, then strip leaves one by one."""
    for seed in range(10):
        pair = BipartitePair.random(10, 0.95, seed)
        F = ExtendableForest.empty([0], 2, 1)
        if is_extendable(F, pair, "exhaustive").verdict != CERTIFIED:
            continue
        F2, emb = extend_tree(F, pair, {0: kary_tree(1, 3)}, mode="exhaustive")
        assert is_extendable(F2, pair, "exhaustive").verdict == CERTIFIED
        for v in reversed(emb[0][1:]):
            F2 = remove_leaf(F2, v)
            assert is_extendable(F2, pair, "exhaustive").verdict == CERTIFIED


def test_extend_leaf_respects_labels():
    pair = BipartitePair.random(8, 0.9, 3)
    F = extend_leaf(ExtendableForest.empty([0], 2, 1), pair, 0, mode="structural")
    (p, c), = F.edges()
    assert p == 0 and c in pair.nbrs(0, 1)
    path = F.path_to_root(c)
    assert alternates(path, pair)


def test_extend_leaf_rejects_full_vertex():
    pair = BipartitePair.random(6, 1.0, 0)
    F = ExtendableForest.empty([0], 1, 1)
    F = extend_leaf(F, pair, 0, mode="structural")
    with pytest.raises(InputError):
        extend_leaf(F, pair, 0, mode="structural")


def test_connect_pair_route_is_directed_path():
    D = Digraph.complete(40)
    heads, tails = [0], [1]
    A1, A2, B1, B2, Z = range(2, 10), range(10, 18), range(18, 26), range(26, 34), range(34, 40)
    pairG = BipartitePair.from_digraph(D, set(A1) | {0}, A2)
    pairH = BipartitePair.from_digraph(D, set(B1) | {1}, B2, reverse=True)
    S = ExtendableForest.empty(heads, 3, 1)
    T = ExtendableForest.empty(tails, 3, 1)
    c = connect_pair(D, S, pairG, T, pairH, Z, heads, tails, 1, mode="structural")
    assert c.route[0] == 0 and c.route[-1] == 1 and verify_path(D, c.route)


def test_split_five_sizes():
    D = sample_gnp(60, 0.6, 1)
    prof = ConnectProfile(d0=3, m=2)
    parts = split_five(D, range(10, 60), range(10), prof)
    assert [len(p) for p in parts] == [10, 10, 10, 10, 10]
    assert len(set().union(*map(set, parts))) == 50


def in_cycle_order(cycle, E):
    succ = {cycle[i]: cycle[(i + 1) % len(cycle)] for i in range(len(cycle))}
    pos = {v: i for i, v in enumerate(cycle)}
    return all(succ[a] == b for a, b in E), sorted(E, key=lambda e: pos[e[0]])


def test_strong_connect_keeps_order():
    D = Digraph.complete(30)
    E = [(0, 1), (2, 3), (4, 5)]
    res = strong_connect(D, range(6, 30), range(6), E, ConnectProfile(d0=3, m=2))
    ok, order = in_cycle_order(res.cycle, E)
    assert ok
    start = order.index(E[0])
    assert order[start:] + order[:start] == E
    assert len(set(res.cycle)) == len(res.cycle)


@settings(max_examples=8)
@given(st.integers(0, 1000))
def test_weak_connect_random_dense(seed):
    D = sample_gnp(120, 0.5, seed)
    E = [(2 * i, 2 * i + 1) for i in range(5)]
    prof = ConnectProfile(d0=3, m=3, seed=seed)
    try:
        res = weak_connect(D, range(10, 120), range(10), E, prof)
    except StageFailure:
        return
    ok, _ = in_cycle_order(res.cycle, E)
    assert ok and res.stats["within_budget"]
    steps = zip(res.cycle, res.cycle[1:] + res.cycle[:1])
    assert all(D.has_edge(a, b) or (a, b) in E for a, b in steps)


def test_connect_input_errors():
    D = Digraph.complete(20)
    prof = ConnectProfile(d0=3, m=1)
    with pytest.raises(InputError):
        strong_connect(D, range(4, 20), range(4), [], prof)
    with pytest.raises(InputError):
        strong_connect(D, range(2, 20), range(4), [(0, 1)], prof)
    with pytest.raises(InputError):
        strong_connect(D, range(4, 20), range(4), [(0, 1), (1, 2)], prof)


def test_g_budget_hand_values():
    # r = ell = 2, m = 2, d0 = 3: ceil(log2(8/2)) + ceil(log2(8/1)) = 2 + 3
    assert g_budget(2, 2, 2, 3) == 5
