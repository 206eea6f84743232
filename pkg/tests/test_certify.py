import itertools
import math

import pytest
from hypothesis import given, strategies as st

from conftest import digraphs
from hamres.certify import (CERTIFIED, REFUTED, UNKNOWN, check_A1, check_A4, check_bundle_R, check_expansion,
                            expansion_domain_size, find_S_structure, verify_A1_witness, verify_A4_witness,
                            verify_expansion_witness, verify_S_witness)
from hamres.digraph import Digraph
from hamres.params import ParameterProfile, clamped_iterlog, iterlog, strong_d0
from hamres.process import hitting_time_min_degree, sample_gnp, sample_process, snapshot


def test_iterlog():
    assert iterlog(math.e ** math.e, 2) == pytest.approx(1.0)
    assert iterlog(2, 3) == float("-inf")
    assert clamped_iterlog(2, 3) == 1.0


def test_profile_defaults_and_validation():
    p = ParameterProfile(100, 2.0, 0.1)
    assert p.m >= 1 and p.lg[2] == pytest.approx(max(1.0, math.log(math.log(100))))
    with pytest.raises(ValueError):
        ParameterProfile(1, 1.0, 0.1)
    with pytest.raises(ValueError):
        ParameterProfile(50, 1.0, 0.1, lg={2: 0.5})
    assert strong_d0(10) == 3


def brute_expansion(D, max_a, degree, factor):
    """First (A, B, sign) with every A-vertex having `degree` nbrs in B and |B| < factor|A|."""
    n = D.n
    for s in ("+", "-"):
        for a in range(1, max_a + 1):
            for A in itertools.combinations(range(n), a):
                rest = [v for v in range(n) if v not in A]
                for b in range(0, min(len(rest), math.ceil(factor * a) - 1) + 1):
                    for B in itertools.combinations(rest, b):
                        Bs = set(B)
                        if all(len(D.nbrs(v, s) & Bs) >= degree for v in A):
                            return A, B, s
    return None


@given(digraphs(min_n=2, max_n=6), st.integers(1, 2), st.sampled_from([1.0, 2.0]), st.sampled_from([1.5, 2.5]))
def test_expansion_agrees_with_brute_force(D, max_a, degree, factor):
    cert = check_expansion(D, max_a, degree, factor, "X")
    brute = brute_expansion(D, max_a, degree, factor)
    assert (cert.verdict == REFUTED) == (brute is not None)
    if cert.verdict == REFUTED:
        assert verify_expansion_witness(D, cert.witness, degree, factor)


def test_expansion_domain_count():
    # n=4, |A|=1, |B| <= 1: 4 * (1 + 3)
    assert expansion_domain_size(4, 1, 2.0) == 16


def test_A1_witness_verifies():
    D = Digraph.cycle(6)
    prof = ParameterProfile(6, 2.0, 0.1)
    cert = check_A1(D, prof)
    assert cert.verdict == REFUTED and verify_A1_witness(D, prof, cert.witness)


def test_A4_complete_certified_and_sparse_refuted():
    K = Digraph.complete(10)
    prof = ParameterProfile(10, 1.0, 0.1, m=2)
    assert check_A4(K, prof).verdict == CERTIFIED
    C = Digraph.cycle(10)
    cert = check_A4(C, prof)
    assert cert.verdict == REFUTED and verify_A4_witness(C, prof, cert.witness)


def test_A4_sampled_never_certifies():
    D = sample_gnp(20, 0.9, 1)
    prof = ParameterProfile(20, 1.0, 0.1, m=2)
    assert check_A4(D, prof).verdict in (UNKNOWN, REFUTED)


def test_S_structure_path_and_cycle():
    P = Digraph(6, [(0, 1), (1, 2), (2, 3), (4, 5)])
    w = find_S_structure(P, [0, 3])
    assert w["kind"] == "path" and verify_S_witness(P, [0, 3], w)
    assert find_S_structure(P, [0, 5]) is None
    T = Digraph(3, [(0, 1), (1, 2), (2, 0)])
    w = find_S_structure(T, [0])
    assert w["kind"] == "cycle" and verify_S_witness(T, [0], w)


def test_bundle_reports_all_items():
    trace = sample_process(12, 4)
    snap = snapshot(trace, hitting_time_min_degree(trace))
    certs = check_bundle_R(snap, 0.1)
    assert [c.property for c in certs] == ["R1", "R2", "R3", "R4", "R5", "R6"]
    assert certs[3].verdict != CERTIFIED
