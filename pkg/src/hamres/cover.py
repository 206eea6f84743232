"""Hall matchings, chained matchings and the two path-cover constructions."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .digraph import Digraph, induced
from .division import DivisionSpec, divide
from .errors import InputError, StageFailure
from .params import RETRY_CAP


class HallViolation(StageFailure):
    """No matching saturates `A`; `violator` is a set U of A-vertices with |N(U)| < |U|."""

    def __init__(self, stage: str, violator: list[int], neighbours: list[int]):
        super().__init__(stage, f"Hall violator of size {len(violator)} with {len(neighbours)} neighbours",
                         {"violator": violator, "neighbours": neighbours})
        self.violator = violator
        self.neighbours = neighbours


@dataclass
class BipartiteView:
    """Undirected bipartite graph; adj[a] lists the B-neighbours of each a in A."""

    A: list[int]
    B: list[int]
    adj: dict[int, list[int]]

    def __post_init__(self) -> None:
        if set(self.A) & set(self.B):
            raise InputError("bipartite classes overlap")

    @classmethod
    def from_digraph(cls, D: Digraph, A: Iterable[int], B: Iterable[int], sign: str = "+") -> "BipartiteView":
        """a ~ b iff a -> b in D (sign '+') or b -> a (sign '-')."""
        A, B = sorted(A), sorted(B)
        Bset = set(B)
        adj = {a: sorted(D.nbrs(a, sign) & Bset) for a in A}
        return cls(A, B, adj)


def hall_matching(view: BipartiteView, stage: str = "matching") -> dict[int, int]:
    """Matching saturating view.A via augmenting paths (ascending scan order).

    Raises HallViolation with the set of A-vertices reachable by alternating
    paths from an unmatched vertex when no such matching exists.
    """
    match_b: dict[int, int] = {}
    match_a: dict[int, int] = {}
    Bset = set(view.B)
    for a0 in view.A:
        # BFS over alternating paths
        parent_b: dict[int, int] = {}
        seen_a = {a0}
        queue = deque([a0])
        free_b = None
        while queue and free_b is None:
            a = queue.popleft()
            for b in view.adj.get(a, ()):
                if b not in Bset or b in parent_b:
                    continue
                parent_b[b] = a
                if b not in match_b:
                    free_b = b
                    break
                a2 = match_b[b]
                if a2 not in seen_a:
                    seen_a.add(a2)
                    queue.append(a2)
        if free_b is None:
            raise HallViolation(stage, sorted(seen_a), sorted(parent_b))
        b = free_b
        while True:
            a = parent_b[b]
            prev = match_a.get(a)
            match_a[a] = b
            match_b[b] = a
            if a == a0:
                break
            b = prev
    assert len(set(match_a.values())) == len(match_a) == len(view.A)
    return match_a


@dataclass
class PathSystem:
    """Vertex-disjoint directed paths; `virtual` is a pseudo-edge (u, v) that
    may appear on one path without being an edge of the host digraph."""

    paths: list[list[int]]
    virtual: tuple[int, int] | None = None
    stats: dict = field(default_factory=dict)

    @property
    def covered(self) -> set[int]:
        return {v for p in self.paths for v in p}

    def to_dict(self) -> dict:
        return {"paths": self.paths, "virtual": list(self.virtual) if self.virtual else None}


def check_path_system(D: Digraph, ps: PathSystem, cover: Iterable[int] | None = None,
                      ends_in: Iterable[int] | None = None, min_length: int = 0) -> list[str]:
    """Independent verifier; returns a list of problems (empty when valid)."""
    problems = []
    seen: set[int] = set()
    virtual_uses = 0
    for idx, p in enumerate(ps.paths):
        if not p:
            problems.append(f"path {idx} empty")
            continue
        if len(p) - 1 < min_length:
            problems.append(f"path {idx} shorter than {min_length}")
        for v in p:
            if v in seen:
                problems.append(f"vertex {v} repeated")
            seen.add(v)
        for a, b in zip(p, p[1:]):
            if ps.virtual is not None and (a, b) == tuple(ps.virtual):
                virtual_uses += 1
            elif not D.has_edge(a, b):
                problems.append(f"path {idx} uses non-edge {a}->{b}")
    if ps.virtual is not None and virtual_uses != 1:
        problems.append(f"virtual edge used {virtual_uses} times")
    if cover is not None and seen != set(cover):
        problems.append(f"covers {len(seen)} vertices, expected {len(set(cover))}")
    if ends_in is not None:
        E = set(ends_in)
        for idx, p in enumerate(ps.paths):
            if p and (p[0] not in E or p[-1] not in E):
                problems.append(f"path {idx} has an endpoint outside the required set")
    return problems


def _link(D: Digraph, src: Sequence[int], dst: Sequence[int], stage: str) -> dict[int, int]:
    return hall_matching(BipartiteView.from_digraph(D, src, dst, "+"), stage)


def chain_matchings(D: Digraph, classes: Sequence[Sequence[int]], reorder: bool = False) -> PathSystem:
    """One path per vertex of classes[0], taking one vertex from each class in turn.

    With `reorder`, a failing link is repaired by ordering the classes along
    a Hamilton path of the class digraph (arc C -> C' when a perfect
    matching from C into C' exists); the classes are interchangeable up to
    relabelling.
    """
    if not classes:
        return PathSystem([])
    size = len(classes[0])
    if any(len(c) != size for c in classes):
        raise InputError("classes must have equal size")
    classes = [list(c) for c in classes]
    try:
        links = [_link(D, a, b, f"link-{i + 1}") for i, (a, b) in enumerate(zip(classes, classes[1:]))]
        order = classes
    except HallViolation as exc:
        if not reorder:
            raise
        order, links = _reordered_chain(D, classes, exc)
    paths = []
    for v in order[0]:
        p = [v]
        for mt in links:
            p.append(mt[p[-1]])
        paths.append(p)
    return PathSystem(paths, stats={"classes": len(order), "reordered": order is not classes})


def _reordered_chain(D: Digraph, classes: list[list[int]], first_error: HallViolation):
    from .oracle import HAM, backtrack

    t = len(classes)
    found: dict[tuple[int, int], dict[int, int]] = {}
    arcs = []
    for i in range(t):
        for j in range(t):
            if i == j:
                continue
            try:
                found[i, j] = _link(D, classes[i], classes[j], "link")
            except HallViolation:
                continue
            arcs.append((i, j))
    # a hub joined both ways to every class turns a Hamilton path into a cycle
    hub = t
    arcs += [(hub, i) for i in range(t)] + [(i, hub) for i in range(t)]
    res = backtrack(Digraph(t + 1, arcs), budget=200_000)
    if res.decision != HAM:
        raise first_error
    cyc = res.cycle
    h = cyc.index(hub)
    seq = cyc[h + 1:] + cyc[:h]
    return [classes[i] for i in seq], [found[a, b] for a, b in zip(seq, seq[1:])]


def _min_degree_into(D: Digraph, vertices: Iterable[int], target: Iterable[int]) -> int:
    T = set(target)
    vs = list(vertices)
    if not vs:
        return 0
    return min(min(len(D.out_set(v) & T), len(D.in_set(v) & T)) for v in vs)


def _divide_local(D: Digraph, host_vertices: Sequence[int], A: Sequence[int], sizes: Sequence[int],
                  m: int, eps: float, seed: int, stream: Sequence[int]) -> list[list[int]]:
    """Divide A inside D[host_vertices]; returns parts in original ids."""
    H, label = induced(D, host_vertices)
    pos = {v: i for i, v in enumerate(label)}
    spec = DivisionSpec.for_graph(H, [pos[v] for v in A], sizes, m, eps, desk=True)
    div = divide(H, spec, seed=seed, stream=stream)
    return [[label[i] for i in part] for part in div.parts]


def initial_path_cover(D: Digraph, B: Iterable[int], ell: int, k: int = 3, eps: float = 0.1,
                       m: int = 1, seed: int = 0, stream: Sequence[int] = (),
                       reorder: bool = True) -> PathSystem:
    """At most 2*ell vertex-disjoint paths (singletons allowed) partitioning B.

    B is first split into medium sets of k_i*ell vertices (k <= k_i < 2k),
    each medium set is split into classes of size ell inside the digraph
    spanned by it and its neighbouring medium sets, and consecutive classes
    are joined by perfect matchings.
    """
    B = sorted(set(B))
    if ell < 1:
        raise InputError("ell must be positive")
    total_classes = len(B) // ell
    if total_classes <= 1:
        if total_classes == 1 and len(B) >= ell:
            pass
        return _finish_initial(D, [[v] for v in B], B)
    # medium set class counts k_i in [k, 2k)
    groups = max(1, total_classes // k)
    ks = [total_classes // groups] * groups
    for i in range(total_classes % groups):
        ks[i] += 1
    sizes = [ks[0] * ell + len(B) - total_classes * ell] + [c * ell for c in ks[1:]]
    try:
        if groups == 1:
            medium = [B]
        else:
            medium = _divide_local(D, range(D.n), B, sizes, m, eps, seed, (*stream, 51))
            # the sampler fills parts exactly and sizes sum to |B|
    except StageFailure as exc:
        raise StageFailure("division-1", str(exc), exc.detail) from exc
    classes: list[list[int]] = []
    leftover: list[int] = []
    for i, Bi in enumerate(medium):
        host = set(Bi)
        if i > 0:
            host |= set(medium[i - 1])
        if i + 1 < len(medium):
            host |= set(medium[i + 1])
        want = [ell] * ks[i]
        try:
            if ks[i] == 1 and len(Bi) == ell:
                parts = [list(Bi)]
            else:
                parts = _divide_local(D, sorted(host), Bi, want, m, eps, seed, (*stream, 52, i))
        except StageFailure as exc:
            raise StageFailure("division-2", str(exc), exc.detail) from exc
        classes.extend(parts)
        used = set().union(*map(set, parts))
        leftover.extend(v for v in Bi if v not in used)
    ps = chain_matchings(D, classes, reorder=reorder)
    paths = ps.paths + [[v] for v in sorted(leftover)]
    return _finish_initial(D, paths, B, {"classes": len(classes), "leftover": len(leftover)})


def _finish_initial(D: Digraph, paths: list[list[int]], B: list[int], extra: dict | None = None) -> PathSystem:
    ends = {p[0] for p in paths} | {p[-1] for p in paths}
    endpoint_degree = max((max(len(D.out_set(v) & ends), len(D.in_set(v) & ends)) for v in range(D.n)), default=0)
    stats = {"paths": len(paths), "endpoint_degree": endpoint_degree}
    stats.update(extra or {})
    ps = PathSystem(paths, stats=stats)
    assert not check_path_system(D, ps, cover=B)
    return ps


def choose_initial_class_size(size_B: int, ell: int) -> int:
    """Largest class size c < ell whose path count c + (|B| mod c) stays below ell.

    Ties favour the count closest to ell - 1, which leaves the fewest final
    paths after the outer paths are threaded through B2.
    """
    best, best_key = 1, None
    for c in range(1, max(2, ell)):
        count = c + size_B % c if size_B >= c else size_B
        if count > ell - 1:
            continue
        key = (count, c)
        if best_key is None or key > best_key:
            best, best_key = c, key
    return best


def final_path_cover(D: Digraph, B1: Iterable[int], B2: Iterable[int], V: Iterable[int], u: int, v: int,
                     ell: int, k: int = 3, eps: float = 0.1, m: int = 1, seed: int = 0,
                     initial_ell: int | None = None, stream: Sequence[int] = (),
                     merge_cycles: bool = True) -> PathSystem:
    """At most ell paths of length >= 1 covering V, B1, B2, u, v with all
    endpoints in B2; one path carries the virtual edge u -> v."""
    B1, B2, V = sorted(set(B1)), sorted(set(B2)), sorted(set(V))
    if set(B1) & set(B2) or set(V) & (set(B1) | set(B2)) or {u, v} & (set(V) | set(B1) | set(B2)) or u == v:
        raise InputError("final cover sets must be disjoint")
    if len(B2) != k * ell:
        raise InputError(f"|B2| = {len(B2)} but k*ell = {k * ell}")
    if k < 2:
        raise InputError("final cover needs k >= 2 so every cycle can be broken inside B2")
    outer = sorted(set(V) | set(B1))
    c = initial_ell or choose_initial_class_size(len(outer), ell)
    init = initial_path_cover(D, outer, c, k, eps, m, seed, (*stream, 61)) if outer else PathSystem([])
    outer_paths = init.paths + [[u, v]]
    if len(outer_paths) > ell:
        raise StageFailure("cover", f"{len(outer_paths)} outer paths do not fit {ell} classes")
    X = [p[0] for p in outer_paths]
    Y = [p[-1] for p in outer_paths]
    # divide B2 into k classes of size ell inside the digraph of edges touching B2
    verts = sorted(set(B2) | set(X) | set(Y))
    H, label = induced(D, verts)
    B2set = set(B2)
    keep = [(a, b) for a, b in H.edges() if label[a] in B2set or label[b] in B2set]
    H = Digraph(H.n, keep)
    pos = {w: i for i, w in enumerate(label)}
    try:
        spec = DivisionSpec.for_graph(H, [pos[w] for w in B2], [ell] * k, m, eps, desk=True)
        parts = [[label[i] for i in p] for p in divide(H, spec, seed=seed, stream=(*stream, 62)).parts]
    except StageFailure as exc:
        raise StageFailure("division-B2", str(exc), exc.detail) from exc
    Q = chain_matchings(D, parts, reorder=True).paths
    C1 = [q[0] for q in Q]
    Ck = [q[-1] for q in Q]
    # e: Y -> C1 and f: Ck -> X, both saturating the outer side
    e = hall_matching(BipartiteView.from_digraph(D, Y, C1, "+"), "attach-ends")
    f = hall_matching(BipartiteView.from_digraph(D, X, Ck, "-"), "attach-starts")
    if merge_cycles:
        e = _merge_cycles(D, Q, outer_paths, e, f)
    start_of = {q[0]: i for i, q in enumerate(Q)}
    end_of = {q[-1]: i for i, q in enumerate(Q)}
    # successor structure on Q indices through the outer paths
    nxt: dict[int, tuple[int, int]] = {}  # Q index -> (outer index, next Q index)
    for oi, p in enumerate(outer_paths):
        qi_from = end_of[f[p[0]]]
        qi_to = start_of[e[p[-1]]]
        nxt[qi_from] = (oi, qi_to)
    has_pred = {to for _, to in nxt.values()}
    paths: list[list[int]] = []
    done: set[int] = set()

    def walk(start: int) -> list[int]:
        seq, i = [], start
        while True:
            done.add(i)
            seq.extend(Q[i])
            if i not in nxt:
                return seq
            oi, j = nxt[i]
            seq.extend(outer_paths[oi])
            if j == start:
                return seq  # closed a cycle; caller cuts it
            i = j

    for i in range(len(Q)):
        if i not in has_pred and i not in done:
            paths.append(walk(i))
    for i in range(len(Q)):
        if i not in done:
            # a cycle through Q_i: cut inside Q_i between its first two vertices
            cyc = walk(i)
            paths.append(cyc[1:] + cyc[:1])
    ps = PathSystem(paths, virtual=(u, v), stats={"outer_paths": len(outer_paths), "initial_class": c,
                                                  "initial": init.stats, "final_paths": len(paths)})
    problems = check_path_system(D, ps, cover=set(V) | set(B1) | set(B2) | {u, v}, ends_in=B2, min_length=1)
    if problems:
        raise StageFailure("cover", "; ".join(problems[:3]))
    return ps


def _merge_cycles(D: Digraph, Q, outer_paths, e: dict[int, int], f: dict[int, int]) -> dict[int, int]:
    """Swap targets of pairs of e-edges lying on different cycles when both
    swapped edges exist; each swap joins two cycles into one."""
    e = dict(e)
    start_of = {q[0]: i for i, q in enumerate(Q)}
    end_of = {q[-1]: i for i, q in enumerate(Q)}
    ys = [p[-1] for p in outer_paths]
    y_of_x = {p[0]: p[-1] for p in outer_paths}

    def cycle_ids() -> dict[int, int]:
        nxt = {}
        for x, y in y_of_x.items():
            nxt[end_of[f[x]]] = start_of[e[y]]
        comp: dict[int, int] = {}
        for s in range(len(Q)):
            if s in comp:
                continue
            i, path = s, []
            while i is not None and i not in comp:
                comp[i] = s
                path.append(i)
                i = nxt.get(i)
            if i is not None and comp[i] != s:
                for j in path:
                    comp[j] = comp[i]
        return comp

    changed = True
    while changed:
        changed = False
        comp = cycle_ids()
        for a in range(len(ys)):
            for b in range(a + 1, len(ys)):
                ya, yb = ys[a], ys[b]
                ca, cb = comp[start_of[e[ya]]], comp[start_of[e[yb]]]
                if ca != cb and D.has_edge(ya, e[yb]) and D.has_edge(yb, e[ya]):
                    e[ya], e[yb] = e[yb], e[ya]
                    changed = True
                    break
            if changed:
                break
    return e
