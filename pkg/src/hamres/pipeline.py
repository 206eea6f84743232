"""Good partition, reservoir contraction and Hamilton cycle assembly."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .cover import BipartiteView, HallViolation, final_path_cover, hall_matching
from .digraph import Digraph, MergeRecord, induced, merge, verify_hamilton, verify_path
from .division import DivisionSpec, divide
from .errors import ConsistencyError, InputError, StageFailure
from .extendable import ConnectProfile, strong_connect, weak_connect
from .params import RETRY_CAP, strong_d0
from .process import make_rng


@dataclass
class PipelineProfile:
    """Part sizes and connector settings for one pipeline run.

    `desk` derives sizes that leave every connection a contact vertex:
    the spine needs 2r - 1 contacts from A and the reservoir needs one per
    final path.
    """

    n: int
    eps: float
    r: int
    ell: int
    a_size: int
    m: int
    k: int = 3
    d0_strong: int = 3
    d0_weak: int = 3
    z_share: float = 0.5
    mode: str = "structural"
    retry_cap: int = RETRY_CAP

    @classmethod
    def desk(cls, D: Digraph, eps: float = 0.1, **overrides) -> "PipelineProfile":
        n = D.n
        r = overrides.pop("r", max(4, math.ceil(n / 15)))
        z_share = overrides.pop("z_share", 0.5)
        delta = max(1, D.min_semidegree())
        base = dict(
            n=n, eps=eps, r=r,
            ell=max(4, math.ceil(n / 25)),
            a_size=max(math.ceil(eps * n / 40), math.ceil(3 * r / z_share)),
            m=max(2, int(n / delta)),
            d0_strong=strong_d0(n),
            z_share=z_share,
        )
        base.update(overrides)
        return cls(**base)

    def sizes(self) -> dict[str, int]:
        kl = self.k * self.ell
        slack = math.ceil(self.eps * kl / 5)
        a3 = kl - slack
        a4 = slack + 4 * self.r
        a2 = self.n - self.a_size - a3 - a4
        return {"A": self.a_size, "B1": a2, "B2'": a3, "B3'": a4}

    def validate(self) -> None:
        s = self.sizes()
        if self.r < 1 or self.ell < 2 or self.k < 2:
            raise InputError("profile needs r >= 1, ell >= 2, k >= 2")
        if min(s.values()) < 1 or s["B1"] < self.ell:
            raise InputError(f"n={self.n} is below the profile minimum (part sizes {s})")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GoodPartition:
    A: list[int]
    B1: list[int]
    B2: list[int]
    R: list[list[int]]
    ell: int
    r: int
    M1: dict[int, int]  # R2 -> R1
    M2: dict[int, int]  # R2 -> R3
    M3: dict[int, int]  # R4 -> R3
    f: dict[int, int]   # R1 -> R4
    quads: list[tuple[int, int, int, int]]  # (u_i, x_i, y_i, v_i)

    def check(self, D: Digraph) -> None:
        parts = [self.A, self.B1, self.B2, *self.R]
        allv = [v for p in parts for v in p]
        if sorted(allv) != list(range(D.n)):
            raise ConsistencyError("parts do not partition V(D)")
        if any(len(Ri) != self.r for Ri in self.R):
            raise ConsistencyError("reservoir classes have the wrong size")
        for M, (src, dst) in ((self.M1, (1, 0)), (self.M2, (1, 2)), (self.M3, (3, 2))):
            if sorted(M) != sorted(self.R[src]) or sorted(M.values()) != sorted(self.R[dst]):
                raise ConsistencyError("matching is not perfect between its classes")
            if any(not D.has_edge(a, b) for a, b in M.items()):
                raise ConsistencyError("matching uses a non-edge")
        if sorted(self.f) != sorted(self.R[0]) or sorted(self.f.values()) != sorted(self.R[3]):
            raise ConsistencyError("f is not a bijection R1 -> R4")


def _divide(D: Digraph, host: Sequence[int], A: Sequence[int], sizes, m, eps, seed, stream, stage):
    H, label = induced(D, host)
    pos = {v: i for i, v in enumerate(label)}
    try:
        spec = DivisionSpec.for_graph(H, [pos[v] for v in A], sizes, m, eps, desk=True)
        div = divide(H, spec, seed=seed, stream=stream)
    except StageFailure as exc:
        raise StageFailure(stage, str(exc), exc.detail) from exc
    return [[label[v] for v in part] for part in div.parts]


def build_good_partition(D: Digraph, profile: PipelineProfile, seed: int = 0) -> GoodPartition:
    profile.validate()
    if D.n != profile.n:
        raise InputError("profile was built for a different n")
    s = profile.sizes()
    A, B1, B2p, B3p = _divide(D, range(D.n), range(D.n), [s["A"], s["B1"], s["B2'"], s["B3'"]],
                              profile.m, profile.eps, seed, (81,), "division-1")
    r = profile.r
    R = _divide(D, sorted(B2p + B3p), B3p, [r] * 4, profile.m, profile.eps, seed, (82,), "division-2")
    used = {v for Ri in R for v in Ri}
    B2 = sorted(v for v in B2p + B3p if v not in used)
    R1, R2, R3, R4 = R

    def match(src, dst, stage):
        try:
            return hall_matching(BipartiteView.from_digraph(D, src, dst, "+"), stage)
        except HallViolation as exc:
            raise StageFailure(stage, str(exc), exc.detail) from exc

    M1 = match(R2, R1, "matching-M1")
    M2 = match(R2, R3, "matching-M2")
    M3 = match(R4, R3, "matching-M3")
    inv1 = {x: u for u, x in M1.items()}
    inv3 = {v: y for y, v in M3.items()}
    quads = []
    f = {}
    for x in sorted(R1):
        u = inv1[x]
        v = M2[u]
        y = inv3[v]
        f[x] = y
        quads.append((u, x, y, v))
    gp = GoodPartition(sorted(A), sorted(B1), B2, [sorted(Ri) for Ri in R], profile.ell, r, M1, M2, M3, f, quads)
    gp.check(D)
    return gp


@dataclass
class Reservoir:
    digraph: Digraph
    tag: list[int]  # tag[i] >= 0: original vertex; tag[i] = -(j+1): merged vertex of quad j
    records: list[MergeRecord]

    def index_of(self, v: int) -> int:
        return self._pos[v]

    def z(self, j: int) -> int:
        return self._pos[-(j + 1)]

    def __post_init__(self) -> None:
        self._pos = {t: i for i, t in enumerate(self.tag)}


def contract_reservoir(D: Digraph, gp: GoodPartition) -> Reservoir:
    """Merge each x_i into y_i = f(x_i); records keep original ids."""
    if len(set(gp.f.values())) != len(gp.f):
        raise ConsistencyError("f is not injective")
    cur, tag = D, list(range(D.n))
    records = []
    for j, (_, x, y, _) in enumerate(gp.quads):
        if gp.f[x] != y:
            raise ConsistencyError("quad disagrees with f")
        pos = {t: i for i, t in enumerate(tag)}
        cur, rec, label = merge(cur, pos[x], pos[y])
        tag = [tag[i] if i >= 0 else -(j + 1) for i in label]
        records.append(MergeRecord(-(j + 1), x, y))
    return Reservoir(cur, tag, records)


@dataclass
class HamiltonResult:
    cycle: list[int]
    report: dict = field(default_factory=dict)


def _segments(walk: list[int], quads) -> tuple[list[list[int]], list[list[int]]]:
    """Split the spine u1 x1 P1 y1 v1 Q1 u2 ... v_r into x_i..y_i segments and v_i..u_{i+1} gaps."""
    pos = {v: i for i, v in enumerate(walk)}
    segs, gaps = [], []
    for i, (u, x, y, v) in enumerate(quads):
        if not (pos[u] + 1 == pos[x] and pos[y] + 1 == pos[v] and pos[x] <= pos[y]):
            raise ConsistencyError("spine does not follow the quad order")
        segs.append(walk[pos[x]:pos[y] + 1])
        if i + 1 < len(quads):
            gaps.append(walk[pos[v] + 1:pos[quads[i + 1][0]]])
    return segs, gaps


def _spine_from(quads, segs, gaps, bypass: set[int]) -> list[int]:
    out: list[int] = []
    for i, (u, _, _, v) in enumerate(quads):
        out.append(u)
        if i not in bypass:
            out.extend(segs[i])
        out.append(v)
        if i < len(gaps):
            out.extend(gaps[i])
    return out


def assemble_hamilton(D: Digraph, gp: GoodPartition, res: Reservoir, profile: PipelineProfile,
                      seed: int = 0) -> HamiltonResult:
    report: dict = {}
    quads = gp.quads
    E = [e for (u, x, y, v) in quads for e in ((u, x), (y, v))]
    V_E = {w for e in E for w in e}
    t0 = time.perf_counter()
    spine_prof = ConnectProfile(profile.d0_strong, profile.m, profile.z_share, mode=profile.mode,
                                eps=profile.eps, seed=seed, stream=(91,))
    try:
        spine = strong_connect(D, gp.A, V_E, E, spine_prof, close=False)
    except StageFailure as exc:
        raise StageFailure("spine", str(exc), exc.detail) from exc
    walk = spine.cycle
    segs, gaps = _segments(walk, quads)
    u1, vr = quads[0][0], quads[-1][3]
    rng = make_rng(seed, 92)
    probe = {i for i in range(len(quads)) if rng.random() < 0.5}
    if not verify_path(D, _spine_from(quads, segs, gaps, probe)):
        raise ConsistencyError("spine stops being a path when segments are bypassed")
    report["spine"] = {"length": len(walk) - 1, "depths": spine.stats["depths"],
                       "seconds": round(time.perf_counter() - t0, 4)}

    t0 = time.perf_counter()
    A_rest = sorted(set(gp.A) - set(walk))
    try:
        cover = final_path_cover(D, gp.B1, gp.B2, A_rest, u1, vr, gp.ell, profile.k, profile.eps,
                                 profile.m, seed, stream=(93,))
    except StageFailure as exc:
        raise StageFailure("cover", f"{exc.stage}: {exc}", exc.detail) from exc
    paths = list(cover.paths)
    first = next(i for i, p in enumerate(paths) if u1 in p)
    paths.insert(0, paths.pop(first))
    report["cover"] = {"paths": len(paths), **{k: v for k, v in cover.stats.items() if k != "initial"},
                       "seconds": round(time.perf_counter() - t0, 4)}

    t0 = time.perf_counter()
    Dp = res.digraph
    Eprime = [(res.index_of(p[0]), res.index_of(p[-1])) for p in paths]
    Rp = [res.z(j) for j in range(len(quads))]
    ends = {w for e in Eprime for w in e}
    weak_prof = ConnectProfile(profile.d0_weak, profile.m, profile.z_share, mode=profile.mode,
                               eps=profile.eps, seed=seed, stream=(94,))
    try:
        wc = weak_connect(Dp, Rp, ends, Eprime, weak_prof)
    except StageFailure as exc:
        raise StageFailure("reservoir-connect", str(exc), exc.detail) from exc
    cyc = wc.cycle
    h = cyc.index(Eprime[0][0])
    cyc = cyc[h:] + cyc[:h]
    if cyc[1] != Eprime[0][1]:
        raise ConsistencyError("reservoir cycle does not start with the anchored path edge")
    report["reservoir"] = {"length": wc.stats["length"], "budget": wc.stats["budget"],
                           "within_budget": wc.stats["within_budget"], "paths": len(Eprime),
                           "seconds": round(time.perf_counter() - t0, 4)}

    t0 = time.perf_counter()
    path_by_start = {res.index_of(p[0]): p for p in paths}
    used: set[int] = set()
    order: list[list[int]] = []
    connectors: list[list[int]] = []
    i = 0
    while i < len(cyc):
        s = cyc[i]
        p = path_by_start[s]
        order.append(p)
        j = i + 2
        conn = []
        while j < len(cyc) and cyc[j] not in path_by_start:
            conn.append(cyc[j])
            j += 1
        expanded = []
        for w in conn:
            t = res.tag[w]
            if t >= 0:
                raise ConsistencyError("reservoir connector left the reservoir")
            q = -t - 1
            used.add(q)
            expanded.extend(segs[q])
        connectors.append(expanded)
        i = j
    S1 = order[0]
    S1a = S1[:S1.index(u1)]
    S1b = S1[S1.index(vr) + 1:]
    C1 = [vr] + S1b + connectors[0]
    for p, c in zip(order[1:], connectors[1:]):
        C1 += p + c
    C1 += S1a + [u1]
    C2 = _spine_from(quads, segs, gaps, used)
    if set(C1) & set(C2) != {u1, vr} or len(set(C1) | set(C2)) != D.n:
        raise StageFailure("splice", "C1 and C2 do not partition the vertex set",
                           {"C1": C1, "C2": C2, "paths": paths})
    cycle = C1 + C2[1:-1]
    if not verify_hamilton(D, cycle):
        raise StageFailure("splice", "spliced cycle failed verification", {"C1": C1, "C2": C2, "paths": paths})
    report["splice"] = {"reservoir_used": len(used), "seconds": round(time.perf_counter() - t0, 4)}
    return HamiltonResult(cycle, report)


def hamiltonize(D: Digraph, eps: float = 0.1, profile: PipelineProfile | None = None, seed: int = 0,
                retries: bool = True) -> HamiltonResult:
    """Partition, contract and assemble; retries with a fresh seed stream on stage failures."""
    profile = profile or PipelineProfile.desk(D, eps)
    profile.validate()
    failures: list[dict] = []
    attempts = profile.retry_cap if retries else 1
    for attempt in range(attempts):
        run_seed = int(make_rng(seed, 99, attempt).integers(2**31))
        t0 = time.perf_counter()
        try:
            gp = build_good_partition(D, profile, run_seed)
            res = contract_reservoir(D, gp)
            out = assemble_hamilton(D, gp, res, profile, run_seed)
        except StageFailure as exc:
            failures.append({"attempt": attempt, "stage": exc.stage, "message": str(exc)})
            continue
        out.report.update({
            "attempts": attempt + 1,
            "failures": failures,
            "profile": profile.to_dict(),
            "sizes": {"A": len(gp.A), "B1": len(gp.B1), "B2": len(gp.B2), "R": 4 * gp.r},
            "seconds": round(time.perf_counter() - t0, 4),
        })
        return out
    raise StageFailure(failures[-1]["stage"], f"all {attempts} attempts failed", {"failures": failures})
