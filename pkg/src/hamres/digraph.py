"""Immutable directed graphs on vertices 0..n-1, plus merging and cycle checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConsistencyError, InputError

__all__ = [
    "InputError",
    "ConsistencyError",
    "Digraph",
    "MergeRecord",
    "normalize_path",
    "neighborhood",
    "merge",
    "expand_merged_cycle",
    "verify_hamilton",
    "verify_path",
    "induced",
    "read_edge_list",
    "write_edge_list",
]


class Digraph:
    """Simple digraph with sorted in/out adjacency tuples.

    Instances are never mutated after construction; builder functions return
    new graphs.
    """

    __slots__ = ("n", "out_adj", "in_adj", "edge_count", "_out_sets", "_in_sets")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise InputError(f"negative vertex count {n}")
        outs: list[set[int]] = [set() for _ in range(n)]
        ins: list[set[int]] = [set() for _ in range(n)]
        count = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at {u}")
            if v in outs[u]:
                raise InputError(f"duplicate edge ({u},{v})")
            outs[u].add(v)
            ins[v].add(u)
            count += 1
        self.n = n
        self.out_adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in outs)
        self.in_adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in ins)
        self._out_sets = tuple(frozenset(s) for s in outs)
        self._in_sets = tuple(frozenset(s) for s in ins)
        self.edge_count = count

    @classmethod
    def complete(cls, n: int) -> "Digraph":
        return cls(n, ((u, v) for u in range(n) for v in range(n) if u != v))

    @classmethod
    def cycle(cls, n: int) -> "Digraph":
        return cls(n, ((i, (i + 1) % n) for i in range(n)) if n >= 2 else ())

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out_sets[u]

    def out_set(self, v: int) -> frozenset[int]:
        return self._out_sets[v]

    def in_set(self, v: int) -> frozenset[int]:
        return self._in_sets[v]

    def nbrs(self, v: int, sign: str) -> frozenset[int]:
        return self._out_sets[v] if sign == "+" else self._in_sets[v]

    def out_degree(self, v: int) -> int:
        return len(self.out_adj[v])

    def in_degree(self, v: int) -> int:
        return len(self.in_adj[v])

    def degree(self, v: int, sign: str) -> int:
        return len(self.out_adj[v]) if sign == "+" else len(self.in_adj[v])

    def min_semidegree(self) -> int:
        if self.n == 0:
            return 0
        return min(min(map(len, self.out_adj)), min(map(len, self.in_adj)))

    def max_semidegree(self) -> int:
        if self.n == 0:
            return 0
        return max(max(map(len, self.out_adj)), max(map(len, self.in_adj)))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.out_adj[u]]

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "Digraph":
        drop = set(removed)
        return Digraph(self.n, (e for e in self.edges() if e not in drop))

    def with_edges(self, added: Iterable[tuple[int, int]]) -> "Digraph":
        extra = [e for e in added if not self.has_edge(*e)]
        return Digraph(self.n, self.edges() + extra)

    def check_symmetry(self) -> bool:
        """Full rescan of the in/out mirror invariant."""
        total = 0
        for u in range(self.n):
            for v in self.out_adj[u]:
                if u not in self._in_sets[v] or u == v:
                    return False
            total += len(self.out_adj[u])
        back = sum(len(a) for a in self.in_adj)
        return total == back == self.edge_count

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Digraph) and self.n == other.n and self.out_adj == other.out_adj

    def __hash__(self) -> int:
        return hash((self.n, self.out_adj))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={self.edge_count})"


def _check_vertices(D: Digraph, vs: Iterable[int]) -> None:
    for v in vs:
        if not (0 <= v < D.n):
            raise InputError(f"vertex {v} out of range for n={D.n}")


def normalize_path(vertices: Sequence[int]) -> list[int]:
    """Collapse consecutive repeats, e.g. [1, 1, 2] -> [1, 2]."""
    out: list[int] = []
    for v in vertices:
        if not out or out[-1] != v:
            out.append(v)
    return out


def neighborhood(D: Digraph, A: Iterable[int], sign: str = "+") -> set[int]:
    """Vertices outside A that receive an edge from A (sign '+') or send one into A ('-')."""
    A = set(A)
    _check_vertices(D, A)
    if sign not in ("+", "-"):
        raise InputError(f"sign must be '+' or '-', got {sign!r}")
    adj = D.out_adj if sign == "+" else D.in_adj
    out: set[int] = set()
    for u in A:
        out.update(adj[u])
    return out - A


@dataclass(frozen=True)
class MergeRecord:
    """z replaced the pair (x, y). `via` is a vertex deleted alongside, if any.

    Ids are in the labelling of the graph *before* the merge, except `z`
    which lives in the merged graph.
    """

    z: int
    source_x: int
    source_y: int
    via: int | None = None


def merge(D: Digraph, x: int, y: int, delete: Sequence[int] = ()) -> tuple[Digraph, MergeRecord, list[int]]:
    """Replace x, y by a fresh vertex z with in-nbhd N-(x)-{y} and out-nbhd N+(y)-{x}.

    Extra vertices in `delete` are dropped too. The surviving vertices keep
    their relative order and z is placed last. Returns (graph, record,
    label) where label[new_id] is the old id (label[z] is -1).
    """
    _check_vertices(D, (x, y))
    if x == y:
        raise InputError("cannot merge a vertex with itself")
    gone = {x, y, *delete}
    _check_vertices(D, gone)
    keep = [v for v in range(D.n) if v not in gone]
    new_id = {v: i for i, v in enumerate(keep)}
    z = len(keep)
    edges = []
    for u in keep:
        for v in D.out_adj[u]:
            if v in new_id:
                edges.append((new_id[u], new_id[v]))
    for w in D.in_adj[x]:
        if w in new_id:
            edges.append((new_id[w], z))
    for w in D.out_adj[y]:
        if w in new_id:
            edges.append((z, new_id[w]))
    via = next(iter(set(delete) - {x, y}), None) if delete else None
    label = keep + [-1]
    return Digraph(z + 1, edges), MergeRecord(z, x, y, via), label


def expand_merged_cycle(cycle: Sequence[int], records: Sequence[MergeRecord],
                        merged: Iterable[int] | None = None) -> list[int]:
    """Replace each merged vertex z by x, (via,) y.

    `cycle` and the records' z must share one labelling, and so must the
    records' x/y/via and the output. Vertices not mentioned in any record
    are passed through unchanged, so the caller relabels first if needed.
    """
    by_z = {r.z: r for r in records}
    if merged is not None:
        missing = (set(merged) & set(cycle)) - set(by_z)
        if missing:
            raise ConsistencyError(f"no merge record for {sorted(missing)}")
    out: list[int] = []
    for v in cycle:
        r = by_z.get(v)
        if r is None:
            out.append(v)
            continue
        out.append(r.source_x)
        if r.via is not None:
            out.append(r.via)
        out.append(r.source_y)
    return out


def verify_path(D: Digraph, path: Sequence[int]) -> bool:
    if not path or len(set(path)) != len(path):
        return False
    if any(not (0 <= v < D.n) for v in path):
        return False
    return all(D.has_edge(path[i], path[i + 1]) for i in range(len(path) - 1))


def verify_hamilton(D: Digraph, cycle: Sequence[int]) -> bool:
    """True iff `cycle` lists every vertex once and wraps around along edges."""
    try:
        c = [int(v) for v in cycle]
    except (TypeError, ValueError):
        return False
    if D.n < 2 or len(c) != D.n or sorted(c) != list(range(D.n)):
        return False
    return all(D.has_edge(c[i], c[(i + 1) % D.n]) for i in range(D.n))


def induced(D: Digraph, A: Iterable[int]) -> tuple[Digraph, list[int]]:
    """Subgraph on A, relabelled 0..|A|-1 in increasing old-id order; returns (graph, label)."""
    label = sorted(set(A))
    _check_vertices(D, label)
    idx = {v: i for i, v in enumerate(label)}
    edges = [(idx[u], idx[v]) for u in label for v in D.out_adj[u] if v in idx]
    return Digraph(len(label), edges), label


def read_edge_list(text: str) -> Digraph:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InputError("empty edge list")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise InputError("first line must be 'n <count>'")
    try:
        n = int(head[1])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise InputError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return Digraph(n, edges)


def write_edge_list(D: Digraph) -> str:
    rows = [f"n {D.n}"] + [f"{u} {v}" for u, v in D.edges()]
    return "\n".join(rows) + "\n"
