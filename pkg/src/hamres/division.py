"""Split a vertex set into parts of prescribed sizes that keep every vertex's
in- and out-degree into each part proportional to the part size.

The sampler places each vertex of A independently into B_0..B_l (or
nowhere), then repairs bad events by resampling only the vertices the event
depends on, in the style of Moser and Tardos. Parts are finally topped up
from B_0 to their exact sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .certify import CERTIFIED, REFUTED, UNKNOWN, Certificate
from .digraph import Digraph
from .errors import InputError, StageFailure
from .process import make_rng

SIGNS = ("+", "-")


@dataclass
class DivisionSpec:
    A: Sequence[int]
    sizes: Sequence[int]
    delta: float
    Delta: float
    m: int
    eps: float

    def __post_init__(self) -> None:
        self.A = sorted(set(self.A))
        self.sizes = [int(s) for s in self.sizes]
        if not self.sizes:
            raise InputError("need at least one part")
        if any(s <= 0 for s in self.sizes):
            raise InputError("part sizes must be positive")
        if sum(self.sizes) > len(self.A):
            raise InputError(f"parts sum to {sum(self.sizes)} > |A| = {len(self.A)}")
        if self.delta > self.Delta:
            raise InputError("delta must not exceed Delta")

    @property
    def ell(self) -> int:
        return len(self.sizes)

    @property
    def a(self) -> int:
        return len(self.A)

    def probabilities(self, desk: bool = False) -> tuple[float, list[float]]:
        """(p_0, [p_1..p_l]) with p = eps*min(a_i)/(10 l a) and p_i = a_i/a - p.

        With `desk`, p is raised so each part expects about sqrt(a_i)/2 fewer
        vertices than its target (at most a_i/4); at small a the literal slack
        is below one vertex and the size event almost never clears.
        """
        a, ell = self.a, self.ell
        p = self.eps * min(self.sizes) / (10 * ell * a)
        if desk:
            small = min(self.sizes)
            p = max(p, min(math.sqrt(small) / 2, small / 4) / a)
        pis = [max(0.0, s / a - p) for s in self.sizes]
        p0 = max(0.0, min(1 - sum(pis), (ell + 1) * p))
        return p0, pis

    @classmethod
    def for_graph(cls, D: Digraph, A: Sequence[int], sizes: Sequence[int], m: int, eps: float,
                  desk: bool = False) -> "DivisionSpec":
        """Use the tightest delta/Delta the graph itself satisfies.

        With `desk`, delta drops to 0 when the smallest lower bound
        a_i*delta/4a is below one neighbour: the integer rounding would
        then demand a neighbour in every tiny part, which the sampler
        cannot reach by local resampling.
        """
        Aset = set(A)
        delta = min(len(D.nbrs(v, s) & Aset) for v in range(D.n) for s in SIGNS)
        if desk and min(sizes) * delta / (4 * len(Aset)) < 1:
            delta = 0
        Delta = max(D.max_semidegree(), delta)
        return cls(A, sizes, delta, Delta, m, eps)


@dataclass
class Division:
    parts: list[list[int]]
    residual: list[int]
    rounds: int
    f2: Certificate | None = None
    spec: DivisionSpec | None = field(default=None, repr=False)


def _log_ge(lhs_log: float, rhs: float) -> bool:
    return rhs <= 0 or lhs_log >= math.log(rhs)


def check_feasibility(spec: DivisionSpec, n: int) -> dict:
    """Evaluate the four size conditions per part, reporting both sides."""
    a, ell, eps, delta, Delta, m = spec.a, spec.ell, spec.eps, spec.delta, spec.Delta, spec.m
    rows = []
    for i, ai in enumerate(spec.sizes):
        base = eps ** 2 * ai ** 2 / a
        expo = ai * delta / (24 * a)
        c1 = (base, 1e3 * ell ** 3)
        try:
            c2_lhs = base * math.exp(expo)
        except OverflowError:
            c2_lhs = math.inf
        c2 = (c2_lhs, 1e5 * ell ** 3 * n)
        c2_ok = base > 0 and _log_ge(math.log(base) + expo, c2[1])
        try:
            c3_lhs = math.exp(expo)
        except OverflowError:
            c3_lhs = math.inf
        c3 = (c3_lhs, 320 * ell * Delta ** 2)
        c4 = (eps ** 2 * ai / 1e3, m * math.log(math.e * n / m) if m > 0 else 0.0)
        rows.append({
            "part": i,
            "C1": {"lhs": c1[0], "rhs": c1[1], "ok": c1[0] >= c1[1]},
            "C2": {"lhs": c2[0], "rhs": c2[1], "ok": c2_ok},
            "C3": {"lhs": c3[0], "rhs": c3[1], "ok": _log_ge(expo, c3[1])},
            "C4": {"lhs": c4[0], "rhs": c4[1], "ok": c4[0] >= c4[1]},
        })
    return {
        "parts": rows,
        "ell_le_log_n": ell <= math.log(n) if n > 1 else False,
        "all_ok": all(r[c]["ok"] for r in rows for c in ("C1", "C2", "C3", "C4")),
    }


def f1_bounds(spec: DivisionSpec, i: int) -> tuple[float, float]:
    ai, a = spec.sizes[i], spec.a
    return ai * spec.delta / (4 * a), 4 * ai * spec.Delta / a


def f1_violations(D: Digraph, spec: DivisionSpec, parts: Sequence[Sequence[int]]) -> list[tuple[int, int, str, int]]:
    """Exhaustive per-vertex check of the final degree bounds; returns (v, i, sign, deg) failures."""
    bad = []
    for i, part in enumerate(parts):
        lo, hi = f1_bounds(spec, i)
        P = set(part)
        for v in range(D.n):
            for s in SIGNS:
                deg = len(D.nbrs(v, s) & P)
                if deg < lo or deg > hi:
                    bad.append((v, i, s, deg))
    return bad


def check_f2(D: Digraph, parts, m: int, eps: float, cap: int = 14, samples: int = 200, seed: int = 0) -> Certificate:
    """Every m-set U has |N^sign(U, A_i)| >= (1/2 + eps/2)|A_i|."""
    n = D.n
    th = {"m": m, "eps": eps}
    psets = [set(p) for p in parts]

    def bad(U):
        Us = set(U)
        for i, P in enumerate(psets):
            for s in SIGNS:
                N = set()
                for u in U:
                    N |= D.nbrs(u, s)
                size = len((N - Us) & P)
                if size < (0.5 + eps / 2) * len(P):
                    return {"U": sorted(U), "part": i, "sign": s, "size": size}
        return None

    if m > n or m <= 0:
        return Certificate("F2", UNKNOWN, None, 0, th)
    if n <= cap:
        count = 0
        for U in combinations(range(n), m):
            count += 1
            w = bad(U)
            if w:
                return Certificate("F2", REFUTED, w, count, th)
        return Certificate("F2", CERTIFIED, None, count, th)
    rng = make_rng(seed, 2)
    for k in range(samples):
        w = bad(rng.choice(n, size=m, replace=False).tolist())
        if w:
            return Certificate("F2", REFUTED, w, k + 1, th)
    return Certificate("F2", UNKNOWN, None, samples, th)


def divide(D: Digraph, spec: DivisionSpec, mode: str = "desk", seed: int = 0,
           max_rounds: int = 10_000, stream: Sequence[int] = ()) -> Division:
    if mode not in ("desk", "strict"):
        raise InputError(f"unknown mode {mode!r}")
    A = spec.A
    if any(not 0 <= v < D.n for v in A):
        raise InputError("A contains vertices outside the graph")
    Aset = set(A)
    for v in range(D.n):
        for s in SIGNS:
            if len(D.nbrs(v, s) & Aset) < spec.delta:
                raise InputError(f"vertex {v} has fewer than delta {s}-neighbours in A")
            if D.degree(v, s) > spec.Delta:
                raise InputError(f"vertex {v} exceeds Delta")

    ell, a, sizes = spec.ell, spec.a, spec.sizes
    if sum(sizes) == a and ell == 1:
        parts = [list(A)]
        return Division(parts, [], 0, check_f2(D, parts, spec.m, spec.eps), spec)

    p0, pis = spec.probabilities(desk=mode == "desk")
    # label k in 0..l is B_k; label -1 means unassigned
    cum = np.cumsum([p0] + pis)
    rng = make_rng(seed, 3, *stream)
    pos = {v: i for i, v in enumerate(A)}
    # B_0 cap and per-part degree windows
    lo = [s * spec.delta / (4 * a) for s in sizes]
    hi = [2 * s * spec.Delta / a for s in sizes]
    hi0 = 2 * min(sizes) * spec.Delta / a
    nb = {s: [[pos[w] for w in D.nbrs(v, s) if w in pos] for v in range(D.n)] for s in SIGNS}
    adj = {s: np.zeros((D.n, a), dtype=np.float32) for s in SIGNS}
    for s in SIGNS:
        for v in range(D.n):
            adj[s][v, nb[s][v]] = 1.0
    lo_arr = np.array(lo)
    hi_arr = np.array(hi)
    onehot_basis = np.eye(ell + 2, dtype=np.float32)

    def draw(k: int) -> np.ndarray:
        u = rng.random(k)
        lab = np.searchsorted(cum, u, side="right")
        lab[lab > ell] = -1
        return lab

    def first_vertex_event(lab: np.ndarray) -> int | None:
        onehot = onehot_basis[lab + 1]
        bad = np.zeros(D.n, dtype=bool)
        for s in SIGNS:
            counts = adj[s] @ onehot
            parts_c = counts[:, 2:]
            bad |= counts[:, 1] > hi0 + 1e-9
            bad |= (parts_c < lo_arr - 1e-9).any(axis=1) | (parts_c > hi_arr + 1e-9).any(axis=1)
        hit = np.flatnonzero(bad)
        return int(hit[0]) if hit.size else None

    def size_event(lab: np.ndarray) -> bool:
        counts = np.bincount(lab + 1, minlength=ell + 2)
        if any(counts[i + 2] > sizes[i] for i in range(ell)):
            return True
        return counts[1:].sum() < sum(sizes)

    restarts = 0
    rounds = 0
    while True:
        lab = draw(a)
        bad_v = None
        while rounds < max_rounds:
            # local events first; the global size event resamples everything
            bad_v = first_vertex_event(lab)
            if bad_v is not None:
                support = sorted(set(nb["+"][bad_v]) | set(nb["-"][bad_v]))
                lab[support] = draw(len(support))
                rounds += 1
                continue
            if size_event(lab):
                lab = draw(a)
                rounds += 1
                continue
            break
        else:
            raise StageFailure("division", f"no clean sample within {max_rounds} rounds",
                               {"rounds": rounds, "last_vertex_event": bad_v})

        parts = [[A[j] for j in np.nonzero(lab == i + 1)[0]] for i in range(ell)]
        spare = [A[j] for j in np.nonzero(lab == 0)[0]]  # already sorted by id
        for i in range(ell):
            need = sizes[i] - len(parts[i])
            parts[i] = sorted(parts[i] + spare[:need])
            spare = spare[need:]
        used = set().union(*map(set, parts))
        residual = [v for v in A if v not in used]
        assert all(len(parts[i]) == sizes[i] for i in range(ell))
        assert len(used) == sum(sizes)
        viol = f1_violations(D, spec, parts)
        assert not viol, f"degree bounds broken after top-up: {viol[:3]}"
        f2 = check_f2(D, parts, spec.m, spec.eps, seed=seed)
        if mode == "strict" and f2.verdict == REFUTED:
            restarts += 1
            if rounds >= max_rounds:
                raise StageFailure("division", "expansion check kept failing", {"f2": f2.to_dict()})
            rounds += 1
            continue
        return Division(parts, residual, rounds, f2, spec)
