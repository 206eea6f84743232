"""A fast invariant suite for `hamres selftest`; each check returns (name, ok, info)."""

from __future__ import annotations

from typing import Callable

from .digraph import Digraph, verify_hamilton
from .division import DivisionSpec, divide, f1_violations
from .oracle import HAM, NON_HAM, TIMEOUT, backtrack, brute_force, held_karp
from .pipeline import hamiltonize
from .process import make_rng, sample_gnp
from .resilience import audit_removal, bipartition_attack, remove_proportional


def _oracle_small(seed: int) -> str:
    rng = make_rng(seed, 700)
    for k in range(200):
        D = sample_gnp(5, float(rng.uniform(0.2, 0.8)), seed, 701, k)
        hk = held_karp(D)
        assert (hk.decision == HAM) == brute_force(D), f"instance {k}"
        assert hk.decision == NON_HAM or verify_hamilton(D, hk.cycle)
    return "200 digraphs on 5 vertices"


def _solvers_agree(seed: int) -> str:
    timeouts = 0
    for k in range(40):
        D = sample_gnp(10, 0.3, seed, 702, k)
        bt = backtrack(D)
        if bt.decision == TIMEOUT:
            timeouts += 1
            continue
        assert bt.decision == held_karp(D).decision, f"instance {k}"
    return f"40 instances, {timeouts} timeouts"


def _cycle_and_path(seed: int) -> str:
    C = Digraph.cycle(5)
    P = Digraph(5, [(i, i + 1) for i in range(4)])
    assert held_karp(C).decision == HAM and held_karp(P).decision == NON_HAM
    return "5-cycle HAM, 5-path NON-HAM"


def _removal_bound(seed: int) -> str:
    D = sample_gnp(30, 0.4, seed, 703)
    H = remove_proportional(D, 0.35, seed)
    assert not audit_removal(D, H, 0.35)
    return f"{len(H.edges())} edges removed"


def _attack(seed: int) -> str:
    att = bipartition_attack(Digraph.complete(20), 0.2, seed)
    assert att.ok, att.audit
    return f"sides {att.audit['sizes']}"


def _division(seed: int) -> str:
    D = sample_gnp(40, 0.6, seed, 704)
    spec = DivisionSpec.for_graph(D, range(40), [10] * 4, m=2, eps=0.1)
    div = divide(D, spec, seed=seed)
    assert not f1_violations(D, spec, div.parts)
    return f"{div.rounds} resampling rounds"


def _pipeline(seed: int) -> str:
    D = Digraph.complete(60)
    res = hamiltonize(D, 0.1, seed=seed)
    assert verify_hamilton(D, res.cycle)
    return f"K60 in {res.report['attempts']} attempt(s)"


CHECKS: list[tuple[str, Callable[[int], str]]] = [
    ("oracle-vs-brute-force", _oracle_small),
    ("held-karp-vs-backtrack", _solvers_agree),
    ("cycle-and-path", _cycle_and_path),
    ("removal-bound", _removal_bound),
    ("attack-complete", _attack),
    ("division-degree-bounds", _division),
    ("pipeline-verifies", _pipeline),
]


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    out = []
    for name, check in CHECKS:
        try:
            out.append((name, True, check(seed)))
        except Exception as exc:  # a failing check is reported, not raised
            out.append((name, False, f"{type(exc).__name__}: {exc}"))
    return out
