"""Verdicts for the degree/expansion conditions and the random-process property bundle.

Set-quantified properties are enumerated exhaustively up to
`profile.exhaustive_cap` vertices. Above that only refutation is attempted,
so the honest outcomes are REFUTED or UNKNOWN.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .digraph import Digraph, InputError
from .params import ParameterProfile, clamped_iterlog
from .process import ProcessSnapshot, make_rng

CERTIFIED = "CERTIFIED"
REFUTED = "REFUTED"
UNKNOWN = "UNKNOWN"

SIGNS = ("+", "-")


@dataclass
class Certificate:
    property: str
    verdict: str
    witness: dict | None = None
    effort: int = 0
    thresholds: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        out = {"property": self.property, "verdict": self.verdict, "effort": self.effort,
               "thresholds": self.thresholds}
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _nbr_masks(D: Digraph, sign: str) -> list[int]:
    adj = D.out_adj if sign == "+" else D.in_adj
    return [sum(1 << w for w in adj[v]) for v in range(D.n)]


def _bits(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# ---- A1 ----------------------------------------------------------------

def check_A1(D: Digraph, profile: ParameterProfile) -> Certificate:
    lo, hi = profile.min_degree, profile.max_degree
    th = {"min": lo, "max": hi}
    for v in range(D.n):
        for s in SIGNS:
            deg = D.degree(v, s)
            if deg < lo or deg > hi:
                return Certificate("A1", REFUTED, {"vertex": v, "sign": s, "degree": deg}, v + 1, th)
    return Certificate("A1", CERTIFIED, None, D.n, th)


def verify_A1_witness(D: Digraph, profile: ParameterProfile, w: dict) -> bool:
    deg = D.degree(w["vertex"], w["sign"])
    return deg < profile.min_degree or deg > profile.max_degree


# ---- expansion (A2 / A3 and R5 / R6) ----------------------------------

def expansion_domain_size(n: int, max_a: int, factor: float) -> int:
    """Number of (A, B) pairs with 1 <= |A| <= max_a, B disjoint, |B| < factor|A|."""
    total = 0
    for a in range(1, min(max_a, n) + 1):
        b_cap = min(n - a, math.ceil(factor * a) - 1)
        total += comb(n, a) * sum(comb(n - a, b) for b in range(b_cap + 1))
    return total


def _expansion_exhaustive(D: Digraph, max_a: int, degree: float, factor: float, sign: str):
    n = D.n
    nbr = _nbr_masks(D, sign)
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int16)
    for i in range(n):
        pc += ((masks >> i) & 1).astype(np.int16)
    need = math.ceil(degree - 1e-12)
    effort = 0
    for a in range(1, min(max_a, n) + 1):
        b_cap = math.ceil(factor * a) - 1
        small = masks[pc <= b_cap]
        for A in combinations(range(n), a):
            amask = sum(1 << v for v in A)
            cand = small[(small & amask) == 0]
            effort += len(cand)
            ok = np.ones(len(cand), dtype=bool)
            for v in A:
                ok &= pc[cand & nbr[v]] >= need
                if not ok.any():
                    break
            if ok.any():
                B = int(cand[np.argmax(ok)])
                return {"A": list(A), "B": _bits(B), "sign": sign}, effort
    return None, effort


def _greedy_cover(D: Digraph, A: list[int], degree: float, sign: str, limit: int) -> list[int] | None:
    """Small B with d^sign(v, B) >= degree for all v in A, or None past `limit`."""
    need = {v: math.ceil(degree - 1e-12) for v in A}
    Aset = set(A)
    B: list[int] = []
    inB: set[int] = set()
    while any(c > 0 for c in need.values()):
        if len(B) >= limit:
            return None
        gain: dict[int, int] = {}
        for v, c in need.items():
            if c > 0:
                for w in D.nbrs(v, sign):
                    if w not in Aset and w not in inB:
                        gain[w] = gain.get(w, 0) + 1
        if not gain:
            return None
        w = min(gain, key=lambda x: (-gain[x], x))
        B.append(w)
        inB.add(w)
        for v in need:
            if w in D.nbrs(v, sign):
                need[v] -= 1
    return B


def _expansion_search(D, max_a, degree, factor, sign, rng, budget):
    n = D.n
    effort = 0
    order = sorted(range(n), key=lambda v: (D.degree(v, sign), v))
    seeds: list[list[int]] = [[v] for v in order[: min(n, 20)]]
    # clusters whose neighbourhoods overlap the most
    for v in order[: min(n, 10)]:
        cluster = [v]
        while len(cluster) < max_a:
            base = set().union(*(D.nbrs(u, sign) for u in cluster))
            best = max((w for w in range(n) if w not in cluster),
                       key=lambda w: (len(base & D.nbrs(w, sign)), -w), default=None)
            if best is None:
                break
            cluster.append(best)
            seeds.append(list(cluster))
    while len(seeds) < budget:
        a = int(rng.integers(1, max_a + 1))
        seeds.append(sorted(rng.choice(n, size=min(a, n), replace=False).tolist()))
    for A in seeds[:budget]:
        if len(A) > max_a:
            continue
        effort += 1
        limit = math.ceil(factor * len(A)) - 1
        if limit < 0:
            continue
        B = _greedy_cover(D, A, degree, sign, limit + 1)
        if B is not None and len(B) <= limit:
            return {"A": sorted(A), "B": sorted(B), "sign": sign}, effort
    return None, effort


def check_expansion(D: Digraph, max_a: int, degree: float, factor: float, name: str,
                    cap: int = 14, seed: int = 0, budget: int = 400) -> Certificate:
    """For both signs: every A with |A| <= max_a whose vertices all have
    `degree` neighbours in a disjoint B forces |B| >= factor |A|."""
    th = {"max_A": max_a, "degree": degree, "factor": factor}
    max_a = max(0, min(int(max_a), D.n))
    if D.n <= cap:
        effort = 0
        for s in SIGNS:
            w, e = _expansion_exhaustive(D, max_a, degree, factor, s)
            effort += e
            if w is not None:
                return Certificate(name, REFUTED, w, effort, th)
        assert effort == 2 * expansion_domain_size(D.n, max_a, factor)
        return Certificate(name, CERTIFIED, None, effort, th)
    rng = make_rng(seed, 7)
    effort = 0
    for s in SIGNS:
        w, e = _expansion_search(D, max_a, degree, factor, s, rng, budget)
        effort += e
        if w is not None:
            return Certificate(name, REFUTED, w, effort, th)
    return Certificate(name, UNKNOWN, None, effort, th)


def verify_expansion_witness(D: Digraph, w: dict, degree: float, factor: float) -> bool:
    A, B, s = set(w["A"]), set(w["B"]), w["sign"]
    if A & B or not A:
        return False
    return all(len(D.nbrs(v, s) & B) >= degree for v in A) and len(B) < factor * len(A)


def check_expansion_A2A3(D: Digraph, profile: ParameterProfile, variant: str = "A2", seed: int = 0) -> Certificate:
    if variant == "A2":
        return check_expansion(D, 2 * profile.m, profile.a2_degree, profile.a2_factor, "A2",
                               profile.exhaustive_cap, seed)
    if variant == "A3":
        return check_expansion(D, 2 * profile.m, profile.a3_degree, profile.a3_factor, "A3",
                               profile.exhaustive_cap, seed)
    raise InputError(f"unknown expansion variant {variant!r}")


# ---- A4 ----------------------------------------------------------------

def check_A4(D: Digraph, profile: ParameterProfile, seed: int = 0, samples: int = 300) -> Certificate:
    n, m = D.n, int(profile.m)
    if m > n:
        raise InputError(f"m={m} exceeds n={n}")
    target = profile.a4_target
    th = {"m": m, "target": target}
    masks = {s: _nbr_masks(D, s) for s in SIGNS}

    def expands(A) -> tuple[bool, str, int]:
        amask = sum(1 << v for v in A)
        for s in SIGNS:
            u = 0
            for v in A:
                u |= masks[s][v]
            size = bin(u & ~amask).count("1")
            if size < target:
                return False, s, size
        return True, "", 0

    if n <= profile.exhaustive_cap:
        effort = 0
        for A in combinations(range(n), m):
            effort += 1
            ok, s, size = expands(A)
            if not ok:
                return Certificate("A4", REFUTED, {"A": list(A), "sign": s, "size": size}, effort, th)
        assert effort == comb(n, m)
        return Certificate("A4", CERTIFIED, None, effort, th)

    rng = make_rng(seed, 4)
    cands: list[list[int]] = []
    for s in SIGNS:
        cands.append(sorted(range(n), key=lambda v: (D.degree(v, s), v))[:m])
        # greedy: grow from each low-degree vertex keeping the union small
        for start in cands[-1][: min(m, 5)]:
            A, u = [start], masks[s][start]
            while len(A) < m:
                w = min((x for x in range(n) if x not in A),
                        key=lambda x: (bin(u | masks[s][x]).count("1"), x))
                A.append(w)
                u |= masks[s][w]
            cands.append(A)
    for _ in range(samples):
        cands.append(rng.choice(n, size=m, replace=False).tolist())
    for i, A in enumerate(cands):
        ok, s, size = expands(A)
        if not ok:
            return Certificate("A4", REFUTED, {"A": sorted(A), "sign": s, "size": size}, i + 1, th)
    return Certificate("A4", UNKNOWN, None, len(cands), th)


def verify_A4_witness(D: Digraph, profile: ParameterProfile, w: dict) -> bool:
    A = set(w["A"])
    N = set()
    for v in A:
        N |= D.nbrs(v, w["sign"])
    return len(A) == profile.m and len(N - A) < profile.a4_target


def certify_pseudorandom(D: Digraph, profile: ParameterProfile, seed: int = 0) -> list[Certificate]:
    return [check_A1(D, profile), check_expansion_A2A3(D, profile, "A2", seed),
            check_expansion_A2A3(D, profile, "A3", seed), check_A4(D, profile, seed)]


# ---- random-process bundle ---------------------------------------------

def _undirected(D: Digraph) -> list[set[int]]:
    return [set(D.out_adj[v]) | set(D.in_adj[v]) for v in range(D.n)]


def find_S_structure(D: Digraph, S) -> dict | None:
    """First S-path (two S vertices within undirected distance 4) or short
    cycle (length 2..4, antiparallel pairs count as 2-cycles) through S."""
    S = sorted(set(S))
    und = _undirected(D)
    Sset = set(S)
    for s in S:
        # BFS to depth 4 keeping one parent per vertex
        parent = {s: None}
        frontier = [s]
        for _ in range(4):
            nxt = []
            for u in frontier:
                for w in sorted(und[u]):
                    if w not in parent:
                        parent[w] = u
                        nxt.append(w)
            frontier = nxt
        hits = sorted(t for t in parent if t in Sset and t != s)
        if hits:
            t = hits[0]
            path = [t]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return {"kind": "path", "vertices": path[::-1]}
    for s in S:
        for w in sorted(und[s]):
            if D.has_edge(s, w) and D.has_edge(w, s):
                return {"kind": "cycle", "vertices": [s, w]}
        nb = sorted(und[s])
        for a, b in combinations(nb, 2):
            if b in und[a]:
                return {"kind": "cycle", "vertices": [s, a, b]}
        for a, b in combinations(nb, 2):
            common = (und[a] & und[b]) - {s, a, b}
            if common:
                return {"kind": "cycle", "vertices": [s, a, min(common), b]}
    return None


def verify_S_witness(D: Digraph, S, w: dict) -> bool:
    vs = w["vertices"]
    und = _undirected(D)
    if len(set(vs)) != len(vs):
        return False
    if w["kind"] == "path":
        return (1 <= len(vs) - 1 <= 4 and vs[0] in S and vs[-1] in S
                and all(vs[i + 1] in und[vs[i]] for i in range(len(vs) - 1)))
    if len(vs) == 2:
        a, b = vs
        return D.has_edge(a, b) and D.has_edge(b, a) and bool(set(vs) & set(S))
    return (len(vs) <= 4 and bool(set(vs) & set(S))
            and all(vs[(i + 1) % len(vs)] in und[vs[i]] for i in range(len(vs))))


def _edges_between(D: Digraph, A, B, sign: str) -> int:
    Bs = set(B)
    return sum(len(D.nbrs(v, sign) & Bs) for v in A)


def check_bundle_R(snap: ProcessSnapshot, eps: float, seed: int = 0, samples: int = 200,
                   cap: int = 14) -> list[Certificate]:
    D, M, n = snap.digraph, snap.M, snap.n
    out: list[Certificate] = []

    hi = 100 * M / n
    bad = next(((v, s) for v in range(n) for s in SIGNS if D.degree(v, s) > hi), None)
    out.append(Certificate("R1", REFUTED if bad else CERTIFIED,
                           {"vertex": bad[0], "sign": bad[1], "degree": D.degree(*bad)} if bad else None,
                           n, {"max": hi}))

    lo = 2 * M / (1e3 * n)
    bad_v = next((v for v in range(n) if D.out_degree(v) + D.in_degree(v) < lo), None)
    out.append(Certificate("R2", CERTIFIED if bad_v is None else REFUTED,
                           None if bad_v is None else {"vertex": bad_v}, n, {"min_sum": lo}))

    S = snap.S_M
    th3 = {"max_S": math.sqrt(n), "low_threshold": snap.low_threshold}
    if len(S) > math.sqrt(n):
        out.append(Certificate("R3", REFUTED, {"kind": "size", "S": sorted(S)}, n, th3))
    else:
        w = find_S_structure(D, S)
        out.append(Certificate("R3", REFUTED if w else CERTIFIED, w, len(S), th3))

    # R4: only sampled plus degree-adversarial sets; never certified
    p, m_M = snap.p_M, snap.m_M
    rng = make_rng(seed, 11)
    a_min = max(1, math.ceil(m_M / 2))
    b_min = math.ceil(n / 2)
    th4 = {"p": p, "A_min": a_min, "B_min": b_min, "eps": eps}
    witness = None
    effort = 0
    if a_min <= n:
        trials = []
        for s in SIGNS:
            order = sorted(range(n), key=lambda v: (D.degree(v, s), v))
            trials.append((order[:a_min], order[:b_min], s))
            trials.append((order[-a_min:], order[-b_min:], s))
        for _ in range(samples):
            a = int(rng.integers(a_min, n + 1))
            b = int(rng.integers(b_min, n + 1))
            trials.append((rng.choice(n, a, replace=False).tolist(),
                           rng.choice(n, b, replace=False).tolist(), SIGNS[int(rng.integers(2))]))
        for A, B, s in trials:
            effort += 1
            e = _edges_between(D, A, B, s)
            base = p * len(A) * len(B)
            if not (1 - eps / 100) * base <= e <= (1 + eps / 100) * base:
                witness = {"A": sorted(A), "B": sorted(B), "sign": s, "edges": e}
                break
    out.append(Certificate("R4", REFUTED if witness else UNKNOWN, witness, effort, th4))

    d_M = snap.d_M
    lg2, lg4 = clamped_iterlog(n, 2), clamped_iterlog(n, 4)
    max_a = int(4 * m_M) if math.isfinite(m_M) else n
    c5 = check_expansion(D, max_a, d_M * lg2 / (4 * lg4), 10.0, "R5", cap, seed)
    c6 = check_expansion(D, max_a, d_M * math.log(n) ** (2 / 3) / 4, math.log(n) ** (1 / 3), "R6", cap, seed)
    out.extend([c5, c6])
    return out
