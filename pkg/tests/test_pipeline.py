import pytest
from hypothesis import given, settings, strategies as st

from hamres.digraph import Digraph, expand_merged_cycle, verify_hamilton
from hamres.errors import ConsistencyError, InputError, StageFailure
from hamres.pipeline import PipelineProfile, build_good_partition, contract_reservoir, hamiltonize
from hamres.process import sample_gnp


def test_profile_rejects_small_n():
    with pytest.raises(InputError):
        PipelineProfile.desk(Digraph.complete(40)).validate()


def test_profile_sizes_partition_n():
    D = Digraph.complete(90)
    p = PipelineProfile.desk(D, 0.1)
    s = p.sizes()
    assert sum(s.values()) == 90
    assert s["B2'"] + s["B3'"] == p.k * p.ell + 4 * p.r


def test_overrides():
    p = PipelineProfile.desk(Digraph.complete(100), 0.1, ell=6, r=5)
    assert p.ell == 6 and p.r == 5 and p.a_size >= 30


def test_good_partition_checks_itself():
    D = sample_gnp(120, 0.5, 2)
    prof = PipelineProfile.desk(D, 0.1)
    gp = build_good_partition(D, prof, seed=3)
    gp.check(D)
    for (u, x, y, v) in gp.quads:
        assert D.has_edge(u, x) and D.has_edge(u, v) and D.has_edge(y, v)
        assert gp.f[x] == y
    gp.M1[gp.R[1][0]] = gp.R[2][0]
    with pytest.raises(ConsistencyError):
        gp.check(D)


def test_contraction_expands_back():
    D = sample_gnp(120, 0.5, 4)
    gp = build_good_partition(D, PipelineProfile.desk(D, 0.1), seed=1)
    res = contract_reservoir(D, gp)
    assert res.digraph.n == D.n - gp.r
    for j, (_, x, y, _) in enumerate(gp.quads):
        z = res.z(j)
        expanded = expand_merged_cycle([res.tag[z]], res.records)
        assert expanded == [x, y]


@pytest.mark.parametrize("seed", range(3))
def test_complete_60(seed):
    D = Digraph.complete(60)
    res = hamiltonize(D, 0.1, seed=seed)
    assert verify_hamilton(D, res.cycle)
    assert {"spine", "cover", "reservoir", "splice"} <= set(res.report)


@settings(max_examples=5)
@given(st.integers(0, 10_000))
def test_dense_random_never_wrong(seed):
    D = sample_gnp(150, 0.5, seed)
    try:
        res = hamiltonize(D, 0.1, seed=seed)
    except StageFailure as exc:
        assert exc.stage and exc.detail.get("failures")
        return
    assert verify_hamilton(D, res.cycle)


def test_obstructed_input_fails_loudly():
    D = sample_gnp(120, 0.6, 5)
    D = D.without_edges([(0, w) for w in D.out_set(0)])
    with pytest.raises((StageFailure, InputError)):
        hamiltonize(D, 0.1, seed=0)


def _outcome(D, seed):
    try:
        return hamiltonize(D, 0.1, seed=seed).cycle
    except StageFailure as exc:
        return exc.detail["failures"]


@pytest.mark.parametrize("seed", [6, 7])
def test_deterministic(seed):
    D = sample_gnp(120, 0.5, seed)
    assert _outcome(D, 2) == _outcome(D, 2)
