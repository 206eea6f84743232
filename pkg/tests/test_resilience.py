import pytest
from hypothesis import given, settings, strategies as st

from conftest import digraphs
from hamres.digraph import Digraph, verify_hamilton
from hamres.errors import InputError, StageFailure
from hamres.oracle import HAM, decide
from hamres.process import sample_gnp
from hamres.resilience import (audit_removal, bipartition_attack, boost_min_degree, desk_boost_set,
                               remove_proportional, removal_instance, resilience_experiment, resilience_trial)


@given(digraphs(min_n=2, max_n=8), st.floats(0, 1), st.integers(0, 100))
def test_removal_respects_floor_quota(D, alpha, seed):
    H = remove_proportional(D, alpha, seed)
    assert not audit_removal(D, H, alpha)
    assert set(H.edges()) <= set(D.edges())


def test_alpha_zero_removes_nothing():
    D = sample_gnp(15, 0.4, 0)
    assert remove_proportional(D, 0.0).edge_count == 0


def test_alpha_out_of_range():
    with pytest.raises(InputError):
        remove_proportional(Digraph.complete(3), 1.5)


def test_audit_flags_heavy_removal():
    D = Digraph.complete(4)
    H = Digraph(4, [(0, 1), (0, 2), (0, 3)])
    assert audit_removal(D, H, 0.5)


def test_attack_complete_20():
    att = bipartition_attack(Digraph.complete(20), 0.2, 0)
    assert att.ok
    A, B = att.sides
    assert A and B and all((a in A) != (b in A) for a, b in att.H.edges())


def test_attack_two_vertices():
    D = Digraph(2, [(0, 1), (1, 0)])
    assert bipartition_attack(D, 0.5, 0).ok
    # below eps = 1/2 a single edge per side cannot be cut within the bound
    weak = bipartition_attack(D, 0.2, 0)
    assert weak.audit["disconnected"] and not weak.audit["bound_ok"]


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_attack_success_is_audited(seed):
    D = sample_gnp(40, 0.3, seed)
    att = bipartition_attack(D, 0.2, seed)
    if att.ok:
        assert not audit_removal(D, att.H, 0.7)
        rest = D.without_edges(att.H.edges())
        A = set(att.sides[0])
        assert all((u in A) == (v in A) for u, v in rest.edges())
        assert decide(rest).decision != HAM


def test_attack_eps_range():
    with pytest.raises(InputError):
        bipartition_attack(Digraph.complete(4), 0.0)


def test_boost_replaces_low_vertex():
    D = Digraph.cycle(8).with_edges([(0, 4), (4, 0), (2, 6), (6, 2)])
    b = boost_min_degree(D, [1])
    assert b.digraph.n == 8 - 2
    res = decide(b.digraph)
    if res.decision == HAM:
        assert verify_hamilton(D, b.expand(res.cycle))


def test_boost_rejects_close_pair():
    D = Digraph.cycle(8)
    with pytest.raises(InputError):
        boost_min_degree(D, [1, 2])


def test_desk_boost_set_is_structure_free():
    D = sample_gnp(20, 0.3, 1)
    S, desk = desk_boost_set(D, D, [])
    assert desk
    from hamres.certify import find_S_structure
    assert find_S_structure(D, S) is None


def test_trial_row_schema():
    row = resilience_trial(12, 0.25, 3)
    for key in ("n", "seed", "M_star", "attack_ok", "survival_alpha", "oracle_verdict", "reduction"):
        assert key in row
    assert row["reduction"] != "BROKEN"


def test_alpha_zero_survival_equals_hitting_time_rate():
    rep = resilience_experiment(10, 0.25, range(8), alpha=0.0)
    s = rep["summary"]
    assert s["survival_rate"] == s["hitting_time_ham"]


def test_removal_instance_deterministic():
    a, b = removal_instance(14, 0.25, 5), removal_instance(14, 0.25, 5)
    assert a[1].edges() == b[1].edges() and a[0].M == b[0].M


def test_half_eps_attack_disconnects():
    hits = sum(bipartition_attack(sample_gnp(30, 0.3, s), 0.5, s).ok for s in range(10))
    assert hits == 10
