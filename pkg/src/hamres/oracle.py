"""Exact Hamiltonicity: subset DP (n <= 22) and a budgeted backtracking search."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .digraph import Digraph, InputError, verify_hamilton

HAM = "HAM"
NON_HAM = "NON-HAM"
TIMEOUT = "TIMEOUT"

HELD_KARP_MAX_N = 22


@dataclass(frozen=True)
class OracleResult:
    decision: str
    cycle: tuple[int, ...] | None = None
    nodes_explored: int = 0

    @property
    def hamiltonian(self) -> bool | None:
        if self.decision == TIMEOUT:
            return None
        return self.decision == HAM


def _popcount_order(bits: int) -> list[np.ndarray]:
    masks = np.arange(1 << bits, dtype=np.int64)
    pc = np.zeros_like(masks)
    for i in range(bits):
        pc += (masks >> i) & 1
    order = np.argsort(pc, kind="stable")
    bounds = np.searchsorted(pc[order], np.arange(bits + 2))
    return [order[bounds[k]:bounds[k + 1]] for k in range(bits + 1)]


def held_karp(D: Digraph) -> OracleResult:
    """Subset DP anchored at vertex 0.

    reach[S] is a bitmask of endpoints v in S such that some path starts at 0
    and visits exactly {0} | S ending at v. Vertex v >= 1 uses bit v-1.
    """
    n = D.n
    if n > HELD_KARP_MAX_N:
        raise InputError(f"held_karp supports n <= {HELD_KARP_MAX_N}, got {n}")
    if n < 2:
        return OracleResult(NON_HAM)
    bits = n - 1
    in_mask = np.zeros(bits, dtype=np.int64)
    for v in range(1, n):
        m = 0
        for u in D.in_adj[v]:
            if u:
                m |= 1 << (u - 1)
        in_mask[v - 1] = m
    reach = np.zeros(1 << bits, dtype=np.int64)
    for v in D.out_adj[0]:
        reach[1 << (v - 1)] = 1 << (v - 1)
    layers = _popcount_order(bits)
    for k in range(2, bits + 1):
        layer = layers[k]
        for i in range(bits):
            sel = layer[((layer >> i) & 1) == 1]
            prev = reach[sel ^ (1 << i)]
            hit = (prev & in_mask[i]) != 0
            reach[sel[hit]] |= 1 << i
    explored = int(np.count_nonzero(reach))
    full = (1 << bits) - 1
    ends = int(reach[full])
    closing = [v for v in D.in_adj[0] if ends >> (v - 1) & 1]
    if not closing:
        return OracleResult(NON_HAM, None, explored)
    # walk back from the lowest closing endpoint
    v = closing[0]
    S = full
    rev = [v]
    while True:
        S ^= 1 << (v - 1)
        if S == 0:
            break
        cand = int(reach[S]) & int(in_mask[v - 1])
        u = (cand & -cand).bit_length()  # lowest set bit -> vertex id
        rev.append(u)
        v = u
    cycle = tuple([0] + rev[::-1])
    assert verify_hamilton(D, cycle)
    return OracleResult(HAM, cycle, explored)


def brute_force(D: Digraph) -> bool:
    """Permutation scan with vertex 0 fixed first. Only for tiny n."""
    if D.n < 2:
        return False
    for rest in permutations(range(1, D.n)):
        if verify_hamilton(D, (0,) + rest):
            return True
    return False


class _Budget(Exception):
    pass


def backtrack(D: Digraph, budget: int = 1_000_000) -> OracleResult:
    """DFS from vertex 0 with forcing and reachability pruning.

    Returns TIMEOUT (never NON-HAM) when more than `budget` search nodes
    would be needed.
    """
    n = D.n
    if n < 2:
        return OracleResult(NON_HAM)
    if any(D.out_degree(v) == 0 or D.in_degree(v) == 0 for v in range(n)):
        return OracleResult(NON_HAM, None, 1)
    out_adj, in_adj = D.out_adj, D.in_adj
    visited = [False] * n
    visited[0] = True
    path = [0]
    nodes = 0

    def feasible(last: int) -> bool:
        # every unvisited vertex still needs a predecessor and a successor
        for w in range(n):
            if visited[w]:
                continue
            if not any(u == last or not visited[u] for u in in_adj[w]):
                return False
            if not any(x == 0 or not visited[x] for x in out_adj[w]):
                return False
        # all unvisited vertices reachable from last through unvisited ones
        seen = {last}
        stack = [last]
        while stack:
            u = stack.pop()
            for x in out_adj[u]:
                if not visited[x] and x not in seen:
                    seen.add(x)
                    stack.append(x)
        return len(seen) - 1 == n - len(path)

    def forced(last: int) -> int | None:
        # an unvisited vertex whose only remaining predecessor is `last`
        for w in out_adj[last]:
            if visited[w]:
                continue
            if sum(1 for u in in_adj[w] if u == last or not visited[u]) == 1:
                return w
        return None

    def dfs() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _Budget
        last = path[-1]
        if len(path) == n:
            return D.has_edge(last, 0)
        if not feasible(last):
            return False
        f = forced(last)
        if f is not None:
            options = [f]
        else:
            options = [w for w in out_adj[last] if not visited[w]]
            options.sort(key=lambda w: (sum(1 for x in out_adj[w] if not visited[x]), w))
        for w in options:
            visited[w] = True
            path.append(w)
            if dfs():
                return True
            path.pop()
            visited[w] = False
        return False

    try:
        found = dfs()
    except _Budget:
        return OracleResult(TIMEOUT, None, nodes)
    except RecursionError:
        return OracleResult(TIMEOUT, None, nodes)
    if found:
        cycle = tuple(path)
        assert verify_hamilton(D, cycle)
        return OracleResult(HAM, cycle, nodes)
    return OracleResult(NON_HAM, None, nodes)


def decide(D: Digraph, budget: int = 2_000_000) -> OracleResult:
    """held_karp when it fits, else backtrack."""
    if D.n <= HELD_KARP_MAX_N:
        return held_karp(D)
    return backtrack(D, budget)
