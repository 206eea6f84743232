import pytest
from hypothesis import given, settings, strategies as st

from hamres.division import DivisionSpec, check_f2, check_feasibility, divide, f1_violations
from hamres.digraph import Digraph
from hamres.errors import InputError, StageFailure
from hamres.process import sample_gnp


def test_spec_validation():
    with pytest.raises(InputError):
        DivisionSpec(range(10), [6, 6], 1, 5, 1, 0.1)
    with pytest.raises(InputError):
        DivisionSpec(range(10), [0, 3], 1, 5, 1, 0.1)
    with pytest.raises(InputError):
        DivisionSpec(range(10), [3], 6, 5, 1, 0.1)


def test_probabilities_sum_to_at_most_one():
    spec = DivisionSpec(range(40), [10] * 4, 10, 30, 2, 0.1)
    for desk in (False, True):
        p0, pis = spec.probabilities(desk)
        assert p0 >= 0 and all(p >= 0 for p in pis) and p0 + sum(pis) <= 1 + 1e-12


def test_feasibility_fails_at_desk_scale():
    D = sample_gnp(40, 0.6, 0)
    spec = DivisionSpec.for_graph(D, range(40), [10] * 4, 2, 0.1)
    rep = check_feasibility(spec, 40)
    assert not rep["all_ok"] and not rep["parts"][0]["C1"]["ok"]


def test_single_part_is_identity():
    D = Digraph.complete(8)
    spec = DivisionSpec.for_graph(D, range(8), [8], 1, 0.1)
    div = divide(D, spec)
    assert div.parts == [list(range(8))] and div.rounds == 0


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_parts_have_exact_sizes_and_degree_bounds(seed, ell):
    D = sample_gnp(36, 0.6, seed)
    sizes = [36 // ell] * ell
    spec = DivisionSpec.for_graph(D, range(36), sizes, 2, 0.1)
    div = divide(D, spec, seed=seed)
    assert [len(p) for p in div.parts] == sizes
    flat = [v for p in div.parts for v in p] + div.residual
    assert sorted(flat) == list(range(36))
    assert not f1_violations(D, spec, div.parts)


def test_divide_on_subset_leaves_rest_untouched():
    D = sample_gnp(50, 0.7, 2)
    A = list(range(10, 50))
    spec = DivisionSpec.for_graph(D, A, [12, 12], 2, 0.1, desk=True)
    div = divide(D, spec, seed=1)
    assert set().union(*map(set, div.parts)) <= set(A)


def test_rejects_vertices_below_delta():
    D = Digraph.cycle(10)
    spec = DivisionSpec(range(10), [5, 5], 2, 5, 1, 0.1)
    with pytest.raises(InputError):
        divide(D, spec)


def test_round_cap_raises_stage_failure():
    D = sample_gnp(40, 0.6, 1)
    spec = DivisionSpec(range(40), [10] * 4, 30, 40, 2, 0.1)
    with pytest.raises((StageFailure, InputError)):
        divide(D, spec, max_rounds=5)


def test_f2_on_complete_graph():
    K = Digraph.complete(10)
    assert check_f2(K, [list(range(5)), list(range(5, 10))], 2, 0.1).verdict == "CERTIFIED"


def test_deterministic():
    D = sample_gnp(40, 0.6, 3)
    spec = DivisionSpec.for_graph(D, range(40), [10] * 4, 2, 0.1)
    assert divide(D, spec, seed=5).parts == divide(D, spec, seed=5).parts
