"""Edge-removal adversaries, low-degree boosting and the resilience experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .certify import find_S_structure
from .digraph import Digraph, MergeRecord, expand_merged_cycle, merge, verify_hamilton
from .errors import InputError, StageFailure
from .oracle import HAM, decide
from .process import hitting_time_min_degree, make_rng, sample_process, snapshot

SIGNS = ("+", "-")


def audit_removal(D: Digraph, H: Digraph, alpha: float) -> list[tuple[int, str, int, int]]:
    """(v, sign, removed, degree) for every vertex where H takes more than alpha of its edges."""
    bad = []
    for v in range(D.n):
        for s in SIGNS:
            if H.degree(v, s) > alpha * D.degree(v, s) + 1e-9:
                bad.append((v, s, H.degree(v, s), D.degree(v, s)))
    if any(not D.has_edge(a, b) for a, b in H.edges()):
        bad.append((-1, "edge", 0, 0))
    return bad


def remove_proportional(D: Digraph, alpha: float, seed: int = 0) -> Digraph:
    """Up to floor(alpha*d) edges per vertex and sign, chosen by random edge priority."""
    if not 0 <= alpha <= 1:
        raise InputError("alpha must lie in [0, 1]")
    edges = D.edges()
    quota_out = [math.floor(alpha * D.out_degree(v) + 1e-9) for v in range(D.n)]
    quota_in = [math.floor(alpha * D.in_degree(v) + 1e-9) for v in range(D.n)]
    order = make_rng(seed, 21).permutation(len(edges))
    taken = []
    for k in order.tolist():
        u, v = edges[k]
        if quota_out[u] > 0 and quota_in[v] > 0:
            quota_out[u] -= 1
            quota_in[v] -= 1
            taken.append((u, v))
    H = Digraph(D.n, taken)
    assert not audit_removal(D, H, alpha)
    return H


@dataclass
class BoostResult:
    digraph: Digraph
    tag: list[int]  # tag[i] >= 0: original vertex; -(j+1): merged vertex of the j-th S vertex
    records: list[MergeRecord]
    assignment: dict[int, tuple[int, int]]

    def expand(self, cycle: Sequence[int]) -> list[int]:
        return expand_merged_cycle([self.tag[v] for v in cycle], self.records,
                                   merged=[r.z for r in self.records])


def boost_min_degree(DmH: Digraph, S: Iterable[int], D: Digraph | None = None) -> BoostResult:
    """Replace each v in S by the merge of its lowest in-neighbour into its lowest out-neighbour."""
    S = sorted(set(S))
    ref = D if D is not None else DmH
    w = find_S_structure(ref, S)
    if w is not None:
        raise InputError(f"S has a short path or cycle: {w}")
    assign: dict[int, tuple[int, int]] = {}
    for v in S:
        ins, outs = DmH.in_set(v), DmH.out_set(v)
        if not ins or not outs:
            raise StageFailure("boost", f"vertex {v} has no {'in' if not ins else 'out'}-neighbour", {"v": v})
        assign[v] = (min(ins), min(outs))
    triples = [u for v in S for u in (assign[v][0], v, assign[v][1])]
    if len(set(triples)) != len(triples):
        raise StageFailure("boost", "boosting triples overlap", {"assignment": assign})
    cur, tag = DmH, list(range(DmH.n))
    records = []
    for j, v in enumerate(S):
        x, y = assign[v]
        pos = {t: i for i, t in enumerate(tag)}
        cur, _, label = merge(cur, pos[x], pos[y], delete=[pos[v]])
        tag = [tag[i] if i >= 0 else -(j + 1) for i in label]
        records.append(MergeRecord(-(j + 1), x, y, v))
    return BoostResult(cur, tag, records, assign)


@dataclass
class AttackResult:
    H: Digraph
    sides: tuple[list[int], list[int]]
    low: list[int]
    phase: str
    rounds: int
    flagged: list[int] = field(default_factory=list)
    audit: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.audit.get("bound_ok", False) and self.audit.get("disconnected", False)


def _need(d: int, eps: float) -> int:
    return math.ceil((0.5 - eps) * d - 1e-9)


def bipartition_attack(D: Digraph, eps: float, seed: int = 0, low_threshold: float | None = None,
                       resample_rounds: int = 200, flip_rounds: int = 8000,
                       balance: float = 0.25, restarts: int = 4) -> AttackResult:
    """Cross edges of a bipartition in which every vertex keeps (1/2 - eps) of each degree on its side.

    Vertices with some degree below `low_threshold` form the low set. The
    rest are split by fair coins; a vertex whose high-sign neighbourhood is
    unbalanced has that neighbourhood redrawn. Low vertices then join the
    side holding at least half their low-sign neighbours. If redrawing
    stalls, a min-cut bisection pass and then noisy single-vertex moves
    that shrink the total shortfall take over, while each side keeps at
    least `balance` of the vertices. A stalled repair restarts from a fresh
    random bisection up to `restarts` times.
    """
    if not 0 < eps <= 0.5:
        raise InputError("eps must lie in (0, 1/2]")
    n = D.n
    if n < 2:
        raise InputError("need at least two vertices")
    t = 0.0 if low_threshold is None else low_threshold
    low = [v for v in range(n) if D.out_degree(v) < t or D.in_degree(v) < t]
    lowset = set(low)
    high = [v for v in range(n) if v not in lowset]
    rng = make_rng(seed, 31)
    side = np.full(n, -1, dtype=np.int64)
    nbrs = {s: [sorted(D.nbrs(v, s)) for v in range(n)] for s in SIGNS}

    def unbalanced(v: int) -> bool:
        for s in SIGNS:
            d = D.degree(v, s)
            if d < max(t, 1):
                continue
            ns = [w for w in nbrs[s][v] if side[w] >= 0]
            a = sum(1 for w in ns if side[w] == 0)
            b = len(ns) - a
            if min(a, b) < (0.5 - eps) * d - 1e-9:
                return True
        return False

    side[high] = rng.integers(0, 2, size=len(high))
    rounds = 0
    phase = "resample"
    while rounds < resample_rounds:
        bad = next((v for v in high if unbalanced(v)), None)
        if bad is None:
            break
        support = sorted({w for s in SIGNS for w in nbrs[s][bad] if w not in lowset})
        side[support] = rng.integers(0, 2, size=len(support))
        rounds += 1
    else:
        phase = "repair"

    flagged = []
    for v in low:
        lowsigns = [s for s in SIGNS if D.degree(v, s) < t]
        if len(lowsigns) == 2:
            flagged.append(v)
        s = min(lowsigns, key=lambda s: (D.degree(v, s), s))
        ns = [w for w in nbrs[s][v] if side[w] >= 0]
        a = sum(1 for w in ns if side[w] == 0)
        side[v] = 0 if 2 * a >= len(ns) else 1

    def settled() -> bool:
        return 0 < int(side.sum()) < n and not _deficits(D, side, eps, nbrs).any()

    if phase == "repair" or not settled():
        phase = "repair"
        floor = max(1, int(balance * n))
        for attempt in range(restarts):
            if attempt or not 0 < int(side.sum()) < n:
                side[:] = rng.permutation(n) % 2
            rounds += _repair(D, side, eps, nbrs, rng, flip_rounds, floor)
            if settled():
                break

    A = [v for v in range(n) if side[v] == 0]
    B = [v for v in range(n) if side[v] == 1]
    cross = [(a, b) for a, b in D.edges() if side[a] != side[b]]
    H = Digraph(n, cross)
    bound_ok = not audit_removal(D, H, 0.5 + eps)
    rest = D.without_edges(cross)
    disconnected = bool(A) and bool(B) and not any(side[a] != side[b] for a, b in rest.edges())
    audit = {"bound_ok": bound_ok, "disconnected": disconnected, "sizes": [len(A), len(B)]}
    return AttackResult(H, (A, B), low, phase, rounds, flagged, audit)


def _deficits(D: Digraph, side: np.ndarray, eps: float, nbrs) -> np.ndarray:
    out = np.zeros(D.n, dtype=np.int64)
    for v in range(D.n):
        for s in SIGNS:
            own = sum(1 for w in nbrs[s][v] if side[w] == side[v])
            out[v] += max(0, _need(D.degree(v, s), eps) - own)
    return out


def _repair(D: Digraph, side: np.ndarray, eps: float, nbrs, rng, budget: int, floor: int) -> int:
    """Min-cut bisection pass, then noisy single-vertex moves on the own-side shortfall."""
    n = D.n
    own = {s: np.array([sum(1 for w in nbrs[s][v] if side[w] == side[v]) for v in range(n)]) for s in SIGNS}
    need = {s: np.array([_need(D.degree(v, s), eps) for v in range(n)]) for s in SIGNS}
    deg = {s: np.array([D.degree(v, s) for v in range(n)]) for s in SIGNS}
    other = {"+": "-", "-": "+"}
    sizes = np.bincount(side, minlength=2)

    def short(v: int) -> int:
        return sum(max(0, int(need[s][v] - own[s][v])) for s in SIGNS)

    def flip(v: int) -> None:
        for s in SIGNS:
            for w in nbrs[s][v]:
                own[other[s]][w] += -1 if side[w] == side[v] else 1
            own[s][v] = deg[s][v] - own[s][v]
        sizes[side[v]] -= 1
        side[v] ^= 1
        sizes[side[v]] += 1

    def region(v: int) -> set[int]:
        return {v} | {w for s in SIGNS for w in nbrs[s][v]}

    def gain(v: int, score) -> int:
        reg = region(v)
        before = sum(score(w) for w in reg)
        flip(v)
        after = sum(score(w) for w in reg)
        flip(v)
        return before - after

    def cut(v: int) -> int:
        return sum(int(deg[s][v] - own[s][v]) for s in SIGNS)

    steps = 0
    improved = True
    while improved and steps < budget:
        improved = False
        for v in rng.permutation(n).tolist():
            if sizes[side[v]] - 1 < max(floor, n * 2 // 5):
                continue
            if gain(v, cut) > 0:
                flip(v)
                improved = True
            steps += 1
    while steps < budget:
        bad = [v for v in range(n) if short(v)]
        if not bad:
            break
        v = bad[int(rng.integers(len(bad)))]
        cands = [w for w in sorted(region(v)) if sizes[side[w]] - 1 >= floor]
        steps += 1
        if not cands:
            continue
        if rng.random() < 0.2:
            w = cands[int(rng.integers(len(cands)))]
        else:
            w = max(cands, key=lambda w: (gain(w, short), -w))
        flip(w)
    return steps


def desk_boost_set(D: Digraph, DmH: Digraph, literal: Iterable[int]) -> tuple[list[int], bool]:
    """The literal low-degree set when non-empty; otherwise the lowest-degree
    vertices of D - H added greedily while S keeps its path/cycle-free structure."""
    S = sorted(set(literal))
    if S:
        return S, False
    order = sorted(range(D.n), key=lambda v: (min(DmH.out_degree(v), DmH.in_degree(v)), v))
    for v in order:
        if DmH.out_degree(v) == 0 or DmH.in_degree(v) == 0:
            continue
        trial = S + [v]
        if find_S_structure(D, trial) is None:
            S = trial
    return sorted(S), True


def removal_instance(n: int, eps: float, seed: int, alpha: float | None = None):
    """The hitting-time snapshot of the seeded process and the proportional removal H."""
    alpha = 0.5 - eps if alpha is None else alpha
    trace = sample_process(n, seed)
    snap = snapshot(trace, hitting_time_min_degree(trace))
    return snap, remove_proportional(snap.digraph, alpha, seed)


def resilience_trial(n: int, eps: float, seed: int, alpha: float | None = None,
                     attack: bool = True) -> dict:
    """One seeded process at its hitting time, both directions."""
    from .pipeline import hamiltonize

    alpha = 0.5 - eps if alpha is None else alpha
    snap, H = removal_instance(n, eps, seed, alpha)
    M, D = snap.M, snap.digraph
    row: dict = {"n": n, "seed": seed, "M_star": M}
    row["oracle_verdict"] = decide(D).decision
    if attack:
        att = bipartition_attack(D, eps, seed, low_threshold=snap.low_threshold)
        row.update(attack_ok=att.ok, attack_phase=att.phase, attack_sides=att.audit["sizes"])
    DmH = D.without_edges(H.edges())
    survival = decide(DmH)
    row["survival_alpha"] = survival.decision
    S, desk_S = desk_boost_set(D, DmH, snap.S_M)
    row["boost_size"] = len(S)
    row["boost_desk_set"] = desk_S
    try:
        boost = boost_min_degree(DmH, S, D)
    except (StageFailure, InputError) as exc:
        row.update(pipeline="boost-failed", reduction="boost-failed", boost_error=str(exc))
        return row
    Dt = boost.digraph
    try:
        cyc = hamiltonize(Dt, eps, seed=seed).cycle
        full = boost.expand(cyc)
        assert verify_hamilton(DmH, full), "expanded pipeline cycle failed verification"
        row["pipeline"] = "HAM"
    except (StageFailure, InputError) as exc:
        row["pipeline"] = f"unknown:{getattr(exc, 'stage', 'input')}"
    red = decide(Dt)
    if red.decision == HAM:
        full = boost.expand(red.cycle)
        row["reduction"] = "verified" if verify_hamilton(DmH, full) else "BROKEN"
    else:
        row["reduction"] = red.decision
    return row


def resilience_experiment(n: int, eps: float, seeds: Sequence[int], alpha: float | None = None,
                          jobs: int = 1) -> dict:
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as ex:
            rows = list(ex.map(resilience_trial, [n] * len(seeds), [eps] * len(seeds), list(seeds),
                               [alpha] * len(seeds)))
    else:
        rows = [resilience_trial(n, eps, s, alpha) for s in seeds]
    total = len(rows)
    summary = {
        "n": n, "eps": eps, "alpha": 0.5 - eps if alpha is None else alpha, "trials": total,
        "hitting_time_ham": sum(r["oracle_verdict"] == HAM for r in rows) / total if total else 0.0,
        "survival_rate": sum(r["survival_alpha"] == HAM for r in rows) / total if total else 0.0,
        "attack_rate": sum(bool(r.get("attack_ok")) for r in rows) / total if total else 0.0,
        "reduction_broken": sum(r["reduction"] == "BROKEN" for r in rows),
    }
    return {"summary": summary, "rows": rows}
