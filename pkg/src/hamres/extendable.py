"""Extendable forests over a bipartite pair and the connection routines built
on them.

A forest grows from roots X in A_1. An edge whose upper endpoint sits at
even depth belongs to H_1, otherwise to H_2, so when H_1 carries the A_1 -> A_2
edges of a digraph and H_2 the A_2 -> A_1 edges, every root-to-vertex path
is a directed path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .certify import CERTIFIED, REFUTED, UNKNOWN, Certificate
from .digraph import Digraph, induced
from .division import DivisionSpec, divide
from .errors import InputError, StageFailure
from .process import make_rng

MODES = ("exhaustive", "sampled", "structural")


@dataclass(frozen=True)
class BipartitePair:
    """Classes A1, A2 and two undirected bipartite graphs H1, H2 between them."""

    A1: frozenset
    A2: frozenset
    H1: Mapping[int, frozenset]
    H2: Mapping[int, frozenset]

    def __post_init__(self) -> None:
        if self.A1 & self.A2:
            raise InputError("bipartite classes overlap")

    def side(self, v: int) -> int:
        if v in self.A1:
            return 1
        if v in self.A2:
            return 2
        raise InputError(f"vertex {v} is in neither class")

    def nbrs(self, v: int, i: int) -> frozenset:
        return (self.H1 if i == 1 else self.H2).get(v, frozenset())

    def cls(self, i: int) -> frozenset:
        return self.A1 if i == 1 else self.A2

    @classmethod
    def from_edges(cls, A1: Iterable[int], A2: Iterable[int], H1: Iterable[tuple[int, int]],
                   H2: Iterable[tuple[int, int]]) -> "BipartitePair":
        A1, A2 = frozenset(A1), frozenset(A2)

        def adj(edges):
            out: dict[int, set[int]] = {}
            for a, b in edges:
                if not ((a in A1 and b in A2) or (a in A2 and b in A1)):
                    raise InputError(f"edge {a}-{b} does not cross the classes")
                out.setdefault(a, set()).add(b)
                out.setdefault(b, set()).add(a)
            return {v: frozenset(s) for v, s in out.items()}

        return cls(A1, A2, adj(H1), adj(H2))

    @classmethod
    def from_digraph(cls, D: Digraph, A1: Iterable[int], A2: Iterable[int], reverse: bool = False) -> "BipartitePair":
        """H1 = A1 -> A2 edges and H2 = A2 -> A1 edges (directions swapped with `reverse`)."""
        A1, A2 = frozenset(A1), frozenset(A2)
        fwd = [(a, b) for a in A1 for b in D.out_set(a) & A2]
        bwd = [(b, a) for b in A2 for a in D.out_set(b) & A1]
        if reverse:
            fwd, bwd = bwd, fwd
        return cls.from_edges(A1, A2, [(a, b) if a in A1 else (b, a) for a, b in fwd],
                              [(a, b) if a in A1 else (b, a) for a, b in bwd])

    @classmethod
    def random(cls, size: int, p: float, seed: int) -> "BipartitePair":
        """A1 = 0..size-1, A2 = size..2size-1, each potential H_i edge kept with probability p."""
        rng = make_rng(seed, 41)
        A1, A2 = range(size), range(size, 2 * size)
        draws = rng.random((2, size, size)) < p
        H1 = [(a, size + b) for a in range(size) for b in range(size) if draws[0, a, b]]
        H2 = [(a, size + b) for a in range(size) for b in range(size) if draws[1, a, b]]
        return cls.from_edges(A1, A2, H1, H2)


@dataclass
class ExtendableForest:
    """Rooted forest with one root per component; `parent` maps each non-root vertex."""

    roots: frozenset
    d: int
    m: int
    parent: dict[int, int] = field(default_factory=dict)
    children: dict[int, list[int]] = field(default_factory=dict)
    oversize_steps: int = 0

    @classmethod
    def empty(cls, roots: Iterable[int], d: int, m: int) -> "ExtendableForest":
        return cls(frozenset(roots), d, m)

    def copy(self) -> "ExtendableForest":
        return ExtendableForest(self.roots, self.d, self.m, dict(self.parent),
                                {k: list(v) for k, v in self.children.items()}, self.oversize_steps)

    @property
    def vertices(self) -> set[int]:
        return set(self.roots) | set(self.parent)

    def __len__(self) -> int:
        return len(self.roots) + len(self.parent)

    def __contains__(self, v: int) -> bool:
        return v in self.roots or v in self.parent

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtendableForest):
            return NotImplemented
        return (self.roots, self.d, self.m, self.parent) == (other.roots, other.d, other.m, other.parent)

    def degree(self, v: int) -> int:
        return len(self.children.get(v, ())) + (v in self.parent)

    def depth(self, v: int) -> int:
        k = 0
        while v in self.parent:
            v = self.parent[v]
            k += 1
        return k

    def root_of(self, v: int) -> int:
        while v in self.parent:
            v = self.parent[v]
        return v

    def edges(self) -> list[tuple[int, int]]:
        """(parent, child) pairs."""
        return sorted((p, c) for c, p in self.parent.items())

    def label(self, p: int) -> int:
        """H-index of every edge hanging below p: 1 at even depth, 2 at odd."""
        return 1 if self.depth(p) % 2 == 0 else 2

    def path_to_root(self, v: int) -> list[int]:
        out = [v]
        while v in self.parent:
            v = self.parent[v]
            out.append(v)
        return out[::-1]

    def add_leaf(self, x: int, y: int) -> None:
        if x not in self:
            raise InputError(f"{x} is not in the forest")
        if y in self:
            raise InputError(f"{y} is already in the forest")
        self.parent[y] = x
        self.children.setdefault(x, []).append(y)

    def drop_leaf(self, y: int) -> None:
        if y in self.roots:
            raise InputError(f"{y} is a root")
        if y not in self.parent:
            raise InputError(f"{y} is not in the forest")
        if self.children.get(y):
            raise InputError(f"{y} is not a leaf")
        p = self.parent.pop(y)
        self.children[p].remove(y)
        if not self.children[p]:
            del self.children[p]
        self.children.pop(y, None)


# ---------------------------------------------------------------- checking


def _mask(vs: Iterable[int], index: Mapping[int, int]) -> int:
    out = 0
    for v in vs:
        j = index.get(v)
        if j is not None:
            out |= 1 << j
    return out


def _structural(state: ExtendableForest, pair: BipartitePair):
    for v in state.vertices:
        if state.degree(v) > state.d:
            return {"condition": "B1", "vertex": v, "degree": state.degree(v)}
    for r in state.roots:
        if r not in pair.A1:
            return {"condition": "B2", "root": r, "reason": "root outside A1"}
    for p, c in state.edges():
        i = state.label(p)
        if c not in pair.nbrs(p, i) or p not in pair.cls(i):
            return {"condition": "B2", "edge": [p, c], "label": i}
    return None


def is_extendable(state: ExtendableForest, pair: BipartitePair, mode: str = "exhaustive",
                  budget: int = 50_000, samples: int = 200, seed: int = 0) -> Certificate:
    """Check the four extendability conditions.

    B1 (degree) and B2 (labels) are always checked exactly. B3 ranges over
    U in A_i with |U| <= 2m and B4 over the minimal sets |U| = m (larger U
    only have larger neighbourhoods); both are enumerated when the number
    of sets fits `budget`, and sampled otherwise.
    """
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}")
    d, m = state.d, state.m
    th = {"d": d, "m": m, "mode": mode}
    w = _structural(state, pair)
    if w:
        return Certificate("extendable", REFUTED, w, 0, th)
    if mode == "structural":
        return Certificate("extendable", UNKNOWN, None, 0, th)

    used = state.vertices
    effort = 0
    exhaustive = True
    rng = make_rng(seed, 43)
    for i in (1, 2):
        Ai = sorted(pair.cls(i))
        other = sorted(pair.cls(3 - i))
        idx = {v: j for j, v in enumerate(other)}
        free = ~_mask(used, idx)
        nb = {u: _mask(pair.nbrs(u, i), idx) for u in Ai}
        kids = {u: len(state.children.get(u, ())) if u in state and state.label(u) == i else 0 for u in Ai}

        def b3(U) -> dict | None:
            N = 0
            for u in U:
                N |= nb[u]
            need = d * len(U) - sum(kids[u] for u in U)
            got = bin(N & free).count("1")
            if got < need:
                return {"condition": "B3", "side": i, "U": sorted(U), "free_nbrs": got, "need": need}
            return None

        def b4(U) -> dict | None:
            N = 0
            for u in U:
                N |= nb[u]
            got = bin(N).count("1")
            if 2 * got < len(other):
                return {"condition": "B4", "side": i, "U": sorted(U), "nbrs": got, "need": len(other) / 2}
            return None

        top = min(2 * m, len(Ai))
        count3 = sum(math.comb(len(Ai), s) for s in range(1, top + 1))
        if mode == "exhaustive" and count3 <= budget:
            for s in range(1, top + 1):
                for U in combinations(Ai, s):
                    effort += 1
                    w = b3(U)
                    if w:
                        return Certificate("extendable", REFUTED, w, effort, th)
        else:
            exhaustive = False
            inside = [u for u in Ai if u in used]
            cands = [(u,) for u in Ai]
            for _ in range(samples):
                pool = inside if inside and rng.random() < 0.5 else Ai
                s = int(rng.integers(1, min(top, len(pool)) + 1))
                cands.append(tuple(pool[j] for j in rng.choice(len(pool), size=s, replace=False)))
            for U in cands:
                effort += 1
                w = b3(U)
                if w:
                    return Certificate("extendable", REFUTED, w, effort, th)

        if m <= len(Ai):
            count4 = math.comb(len(Ai), m)
            if mode == "exhaustive" and count4 <= budget:
                it = combinations(Ai, m)
            else:
                exhaustive = False
                it = (tuple(Ai[j] for j in rng.choice(len(Ai), size=m, replace=False)) for _ in range(samples))
            for U in it:
                effort += 1
                w = b4(U)
                if w:
                    return Certificate("extendable", REFUTED, w, effort, th)
    return Certificate("extendable", CERTIFIED if exhaustive else UNKNOWN, None, effort, th)


def leaf_size_bound(state: ExtendableForest, pair: BipartitePair) -> float:
    return min(len(pair.A1), len(pair.A2)) / 2 - 2 * state.d * state.m - 2


def tree_size_bound(state: ExtendableForest, pair: BipartitePair) -> float:
    return min(len(pair.A1), len(pair.A2)) / 2 - 2 * state.d * state.m - 1


def connect_size_bound(state: ExtendableForest, pair: BipartitePair) -> float:
    return min(len(pair.A1), len(pair.A2)) / 2 - 10 * state.d * state.m - 1


# ---------------------------------------------------------------- growth


def _accepts(cert: Certificate, mode: str) -> bool:
    return cert.verdict == CERTIFIED if mode == "exhaustive" else cert.verdict != REFUTED


def _extend_leaf(state: ExtendableForest, pair: BipartitePair, x: int, mode: str,
                 strict_size: bool) -> tuple[ExtendableForest, int]:
    if x not in state:
        raise InputError(f"{x} is not in the forest")
    if state.degree(x) >= state.d:
        raise InputError(f"{x} already has degree {state.d}")
    oversize = len(state) > leaf_size_bound(state, pair)
    if oversize and strict_size:
        raise InputError(f"forest of {len(state)} vertices exceeds the leaf-addition size bound")
    i = state.label(x)
    used = state.vertices
    for y in sorted(pair.nbrs(x, i) - used):
        new = state.copy()
        new.add_leaf(x, y)
        new.oversize_steps += oversize
        if mode == "structural" or _accepts(is_extendable(new, pair, mode), mode):
            return new, y
    raise StageFailure("extend-leaf", f"no admissible leaf at {x}", {"x": x, "mode": mode})


def extend_leaf(state: ExtendableForest, pair: BipartitePair, x: int, mode: str = "sampled",
                strict_size: bool = False) -> ExtendableForest:
    """New state with one edge x-y added; y is the lowest admissible id."""
    return _extend_leaf(state, pair, x, mode, strict_size)[0]


def remove_leaf(state: ExtendableForest, y: int) -> ExtendableForest:
    new = state.copy()
    new.drop_leaf(y)
    return new


Shape = tuple  # a rooted tree is the tuple of its child subtrees


def kary_tree(k: int, depth: int) -> Shape:
    if depth <= 0 or k <= 0:
        return ()
    sub = kary_tree(k, depth - 1)
    return tuple(sub for _ in range(k))


def shape_size(shape: Shape) -> int:
    return 1 + sum(shape_size(c) for c in shape)


def extend_tree(state: ExtendableForest, pair: BipartitePair, shapes: Mapping[int, Shape],
                mode: str = "sampled", strict_size: bool = False) -> tuple[ExtendableForest, dict[int, list[int]]]:
    """Embed one shape at each root (roots must have degree 0), breadth first.

    Returns the new state and, per root, its embedded vertices in BFS order.
    The input state is left untouched on failure.
    """
    for r in shapes:
        if r not in state or state.degree(r) != 0:
            raise InputError(f"root {r} must be an isolated forest vertex")
    extra = sum(shape_size(s) - 1 for s in shapes.values())
    if strict_size and len(state) + extra > tree_size_bound(state, pair):
        raise InputError("tree embedding exceeds the size bound")
    cur = state
    out: dict[int, list[int]] = {}
    done = 0
    for r in sorted(shapes):
        order = [r]
        queue = [(r, shapes[r])]
        while queue:
            v, sh = queue.pop(0)
            for child in sh:
                try:
                    cur, y = _extend_leaf(cur, pair, v, mode, strict_size)
                except StageFailure as exc:
                    raise StageFailure("extend-tree", f"embedding stopped after {done} leaves",
                                       {"root": r, "at": v, **(exc.detail or {})}) from exc
                done += 1
                order.append(y)
                queue.append((y, child))
        out[r] = order
    return cur, out


def alternates(path: Sequence[int], pair: BipartitePair) -> bool:
    """Does the path use H1, H2, H1, ... starting from an A1 vertex?"""
    if not path or path[0] not in pair.A1:
        return False
    for k, (a, b) in enumerate(zip(path, path[1:])):
        if b not in pair.nbrs(a, 1 if k % 2 == 0 else 2):
            return False
    return True


@dataclass
class Connection:
    x: int
    y: int
    x0: int
    y0: int
    P: list[int]
    Q: list[int]
    z: int
    S: ExtendableForest = field(repr=False)
    T: ExtendableForest = field(repr=False)
    depth: int = 0

    @property
    def route(self) -> list[int]:
        """Directed x -> y path P z reverse(Q)."""
        return self.P + [self.z] + self.Q[::-1]


def connect_pair(D: Digraph, S: ExtendableForest, pairG: BipartitePair, T: ExtendableForest,
                 pairH: BipartitePair, Z: Iterable[int], Xp: Sequence[int], Yp: Sequence[int], j: int,
                 mode: str = "sampled", strict_size: bool = False) -> Connection:
    """Grow depth-j trees from X' and Y', find x0 -> z -> y0 with z in Z, prune back to the two paths."""
    Z = frozenset(Z)
    d = S.d
    branch = max(1, d - 1)
    need = max(1, math.ceil(S.m / branch ** j))
    Xp = sorted(Xp)[:need]
    Yp = sorted(Yp)[:need]
    if not Xp or not Yp:
        raise InputError("connect_pair needs non-empty root sets")
    if strict_size and (len(S) > connect_size_bound(S, pairG) or len(T) > connect_size_bound(T, pairH)):
        raise InputError("forests exceed the connection size bound")
    shape = kary_tree(branch, j)
    try:
        S1, embS = extend_tree(S, pairG, {x: shape for x in Xp}, mode, strict_size)
        T1, embT = extend_tree(T, pairH, {y: shape for y in Yp}, mode, strict_size)
    except StageFailure as exc:
        raise StageFailure("connect-pair", f"tree embedding failed at depth {j}", exc.detail) from exc

    def bfs_order(emb: dict[int, list[int]], F: ExtendableForest) -> list[int]:
        vs = [v for r in sorted(emb) for v in emb[r]]
        return sorted(vs, key=lambda v: (F.depth(v), v))

    sv, tv = bfs_order(embS, S1), bfs_order(embT, T1)
    outZ = {v: D.out_set(v) & Z for v in sv}
    inZ = {v: D.in_set(v) & Z for v in tv}
    hit = None
    for a in sv:
        if not outZ[a]:
            continue
        for b in tv:
            common = outZ[a] & inZ[b]
            if common:
                hit = (a, b, min(common))
                break
        if hit:
            break
    if hit is None:
        raise StageFailure("connect-pair", f"no contact pair through Z at depth {j}",
                           {"depth": j, "roots": [len(Xp), len(Yp)], "Z": len(Z)})
    x0, y0, z = hit
    P = S1.path_to_root(x0)
    Q = T1.path_to_root(y0)
    S2 = _prune(S1, [v for r in embS for v in embS[r]], set(P))
    T2 = _prune(T1, [v for r in embT for v in embT[r]], set(Q))
    route = P + [z] + Q[::-1]
    if not alternates(P, pairG) or not alternates(Q, pairH):
        raise AssertionError("connection path does not alternate")
    if any(not D.has_edge(a, b) for a, b in zip(route, route[1:])):
        raise AssertionError("connection route is not a directed path")
    return Connection(P[0], Q[0], x0, y0, P, Q, z, S2, T2, j)


def _prune(F: ExtendableForest, embedded: list[int], keep: set[int]) -> ExtendableForest:
    out = F.copy()
    for v in sorted(embedded, key=lambda v: -F.depth(v)):
        if v not in keep and v not in out.roots:
            out.drop_leaf(v)
    return out


# ---------------------------------------------------------------- connectors


@dataclass
class ConnectProfile:
    """Knobs shared by the two connection routines.

    `z_share` is the fraction of A set aside as contact vertices Z; the
    remaining four tree classes split the rest evenly. `depth` caps the
    tree depth; by default it follows the m/(d0-1)^j root-count rule.
    """

    d0: int
    m: int
    z_share: float = 0.2
    depth: int | None = None
    mode: str = "structural"
    eps: float = 0.1
    seed: int = 0
    strict_size: bool = False
    stream: tuple[int, ...] = ()


def _depth_for(profile: ConnectProfile, target: float) -> int:
    if profile.depth is not None:
        return profile.depth
    if target <= 1:
        return 0
    return max(0, math.ceil(math.log(target) / math.log(profile.d0 - 1)))


def split_five(D: Digraph, A: Sequence[int], V: Iterable[int], profile: ConnectProfile) -> list[list[int]]:
    """Divide A inside D[A u V] into tree classes A1', A2, B1', B2 and contact class Z."""
    A = sorted(A)
    a = len(A)
    tree = int((1 - profile.z_share) / 4 * a)
    zsize = int(profile.z_share * a)
    sizes = [tree] * 4 + [zsize]
    live = [i for i, s in enumerate(sizes) if s > 0]
    if not live:
        raise StageFailure("split", f"|A| = {a} is too small to split")
    host = sorted(set(A) | set(V))
    H, label = induced(D, host)
    pos = {v: i for i, v in enumerate(label)}
    spec = DivisionSpec.for_graph(H, [pos[v] for v in A], [sizes[i] for i in live], profile.m, profile.eps, desk=True)
    try:
        div = divide(H, spec, seed=profile.seed, stream=(*profile.stream, 71))
    except StageFailure as exc:
        raise StageFailure("split", str(exc), exc.detail) from exc
    parts: list[list[int]] = [[] for _ in sizes]
    for i, part in zip(live, div.parts):
        parts[i] = [label[v] for v in part]
    return parts


@dataclass
class ConnectResult:
    cycle: list[int]
    connections: list[Connection] = field(repr=False)
    parts: list[list[int]] = field(repr=False)
    stats: dict = field(default_factory=dict)


def _check_edges(A: Iterable[int], V: Iterable[int], E: Sequence[tuple[int, int]]) -> None:
    Aset, Vset = set(A), set(V)
    if Aset & Vset:
        raise InputError("A and V must be disjoint")
    ends = [v for e in E for v in e]
    if len(set(ends)) != len(ends):
        raise InputError("edges must be vertex-disjoint")
    if not set(ends) <= Vset:
        raise InputError("edge endpoints must lie in V")
    if not E:
        raise InputError("need at least one edge")


def _setup(D: Digraph, A, V, E, profile: ConnectProfile):
    parts = split_five(D, A, V, profile)
    A1p, A2, B1p, B2, Z = parts
    heads = [x for _, x in E]
    tails = [y for y, _ in E]
    pairG = BipartitePair.from_digraph(D, set(A1p) | set(heads), A2)
    pairH = BipartitePair.from_digraph(D, set(B1p) | set(tails), B2, reverse=True)
    S = ExtendableForest.empty(heads, profile.d0, profile.m)
    T = ExtendableForest.empty(tails, profile.d0, profile.m)
    return parts, pairG, pairH, S, T, set(Z)


def _connect(D, S, pairG, T, pairH, Z, Xp, Yp, max_depth, profile, stage):
    last = None
    for j in range(max_depth + 1):
        try:
            return connect_pair(D, S, pairG, T, pairH, Z, Xp, Yp, j, profile.mode, profile.strict_size)
        except StageFailure as exc:
            last = exc
    raise StageFailure(stage, f"no connection up to depth {max_depth}: {last}", last.detail if last else None)


def strong_connect(D: Digraph, A: Iterable[int], V: Iterable[int], E: Sequence[tuple[int, int]],
                   profile: ConnectProfile, close: bool = True) -> ConnectResult:
    """Directed cycle through e_1, ..., e_l in this order, other vertices from A.

    With close=False the last connection (head of e_l back to tail of e_1)
    is skipped and `cycle` is the path from the tail of e_1 to the head of e_l.
    """
    A, V, E = sorted(set(A)), set(V), [tuple(e) for e in E]
    _check_edges(A, V, E)
    parts, pairG, pairH, S, T, Z = _setup(D, A, V, E, profile)
    ell = len(E)
    k = _depth_for(profile, profile.m)
    conns: list[Connection] = []
    todo = range(ell) if close else range(ell - 1)
    for i in todo:
        x, y = E[i][1], E[(i + 1) % ell][0]
        c = _connect(D, S, pairG, T, pairH, Z, [x], [y], k, profile, "strong-connect")
        if c.x != x or c.y != y:
            raise AssertionError("connection attached to the wrong roots")
        S, T = c.S, c.T
        Z.discard(c.z)
        conns.append(c)
    walk: list[int] = []
    for i in range(ell):
        walk.append(E[i][0])
        if i < len(conns):
            walk.extend(conns[i].route[:-1])
        else:
            walk.append(E[i][1])
    _verify_walk(D, walk, E, closed=close, ordered=True)
    return ConnectResult(walk, conns, parts, {"depth_cap": k, "depths": [c.depth for c in conns],
                                              "length": len(walk) - (0 if close else 1)})


def g_budget(r: int, ell: int, m: int, d0: int) -> int:
    """Sum over i = 1..r of ceil(log(4m / (ell + 1 - i)) / log(d0 - 1))."""
    return sum(math.ceil(math.log(4 * m / (ell + 1 - i)) / math.log(d0 - 1)) for i in range(1, r + 1))


def weak_connect(D: Digraph, A: Iterable[int], V: Iterable[int], E: Sequence[tuple[int, int]],
                 profile: ConnectProfile) -> ConnectResult:
    """Directed cycle containing every edge of E in some order, other vertices from A."""
    A, V, E = sorted(set(A)), set(V), [tuple(e) for e in E]
    _check_edges(A, V, E)
    parts, pairG, pairH, S, T, Z = _setup(D, A, V, E, profile)
    ell = len(E)
    paths = [[y, x] for y, x in E]
    conns: list[Connection] = []
    while len(paths) > 1:
        r = len(paths)
        half = r // 2
        kp = _depth_for(profile, 4 * profile.m / r)
        splits = [(paths[:half], paths[half:2 * half]), (paths[half:2 * half], paths[:half])]
        c, err = None, None
        for left, right in splits:
            try:
                c = _connect(D, S, pairG, T, pairH, Z, [p[-1] for p in left], [p[0] for p in right], kp,
                             profile, "weak-connect")
                break
            except StageFailure as exc:
                err = exc
        if c is None:
            raise StageFailure("weak-connect", f"round with {r} paths failed: {err}", {"paths": r})
        S, T = c.S, c.T
        Z.discard(c.z)
        conns.append(c)
        a = next(p for p in paths if p[-1] == c.x)
        b = next(p for p in paths if p[0] == c.y)
        merged = a + c.route[1:-1] + b
        paths = [merged] + [p for p in paths if p is not a and p is not b]
    R = paths[0]
    k = _depth_for(profile, 2 * profile.m)
    c = _connect(D, S, pairG, T, pairH, Z, [R[-1]], [R[0]], k, profile, "weak-connect")
    conns.append(c)
    cycle = R + c.route[1:-1]
    _verify_walk(D, cycle, E, closed=True, ordered=False)
    budget = ell + 4 * g_budget(ell, ell, profile.m, profile.d0)
    return ConnectResult(cycle, conns, parts, {"length": len(cycle), "budget": budget,
                                               "within_budget": len(cycle) <= budget,
                                               "depths": [c.depth for c in conns]})


def _verify_walk(D: Digraph, walk: list[int], E, closed: bool, ordered: bool) -> None:
    if len(set(walk)) != len(walk):
        raise AssertionError("connector walk repeats a vertex")
    Eset = set(E)
    steps = list(zip(walk, walk[1:])) + ([(walk[-1], walk[0])] if closed else [])
    for a, b in steps:
        if (a, b) not in Eset and not D.has_edge(a, b):
            raise AssertionError(f"connector walk uses non-edge {a}->{b}")
    used = [s for s in steps if s in Eset]
    if set(used) != Eset:
        raise AssertionError("connector walk misses a prescribed edge")
    if ordered:
        start = used.index(E[0])
        if used[start:] + used[:start] != list(E):
            raise AssertionError("prescribed edges appear out of order")
