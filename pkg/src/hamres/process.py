"""Seeded samplers: the random digraph process, D(n, p) and D(n, M)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .digraph import Digraph, InputError
from .params import clamped_iterlog

RNG_ALGORITHM = "numpy.PCG64+SeedSequence"
MATERIALIZE_MAX_N = 2000


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for (seed, trial, ...) via SeedSequence hashing."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


def pair_of(index: int, n: int) -> tuple[int, int]:
    """Ordered pair number `index` among the n(n-1) pairs (u, v), u != v."""
    u, r = divmod(int(index), n - 1)
    return u, (r if r < u else r + 1)


@dataclass
class ProcessTrace:
    """Uniform random order of all ordered pairs; D_M is the first M of them.

    For n <= MATERIALIZE_MAX_N the whole permutation is drawn up front.
    Above that, pairs are drawn lazily without replacement and cached, so a
    trace is still a pure function of (n, seed).
    """

    n: int
    seed: int
    stream: tuple[int, ...] = ()
    _order: list[int] = field(default_factory=list, repr=False)
    _seen: set[int] = field(default_factory=set, repr=False)
    _rng: np.random.Generator | None = field(default=None, repr=False)

    @property
    def total(self) -> int:
        return self.n * (self.n - 1)

    def _extend(self, M: int) -> None:
        total = self.total
        M = min(M, total)
        while len(self._order) < M:
            # rejection sampling stays cheap while the prefix is a small fraction
            batch = self._rng.integers(0, total, size=max(64, M - len(self._order)))
            for k in batch.tolist():
                if k not in self._seen:
                    self._seen.add(k)
                    self._order.append(k)
                    if len(self._order) >= M:
                        break

    def index(self, t: int) -> int:
        self._extend(t + 1)
        return self._order[t]

    def pair(self, t: int) -> tuple[int, int]:
        return pair_of(self.index(t), self.n)

    def prefix(self, M: int) -> list[tuple[int, int]]:
        if not 0 <= M <= self.total:
            raise InputError(f"M={M} outside [0, {self.total}]")
        self._extend(M)
        n = self.n
        return [pair_of(k, n) for k in self._order[:M]]

    def digraph(self, M: int) -> Digraph:
        return Digraph(self.n, self.prefix(M))


def sample_process(n: int, seed: int, *stream: int) -> ProcessTrace:
    if n < 2:
        raise InputError("the process needs n >= 2")
    rng = make_rng(seed, *stream)
    trace = ProcessTrace(n, seed, tuple(stream), _rng=rng)
    if n <= MATERIALIZE_MAX_N:
        trace._order = rng.permutation(trace.total).tolist()
    return trace


def hitting_time_min_degree(trace: ProcessTrace, k: int = 1) -> int:
    """Smallest M with min in- and out-degree of D_M both at least k."""
    if k < 1:
        raise InputError("k must be >= 1")
    n = trace.n
    outd = [0] * n
    ind = [0] * n
    short_out = n  # vertices with out-degree < k
    short_in = n
    for t in range(trace.total):
        u, v = trace.pair(t)
        outd[u] += 1
        if outd[u] == k:
            short_out -= 1
        ind[v] += 1
        if ind[v] == k:
            short_in -= 1
        if short_out == 0 and short_in == 0:
            return t + 1
    return trace.total


def sample_gnp(n: int, p: float, seed: int, *stream: int) -> Digraph:
    if not 0 <= p <= 1:
        raise InputError(f"p={p} outside [0, 1]")
    rng = make_rng(seed, *stream)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    us, vs = np.nonzero(mask)
    return Digraph(n, zip(us.tolist(), vs.tolist()))


def sample_dnm(n: int, M: int, seed: int, *stream: int) -> Digraph:
    return sample_process(n, seed, *stream).digraph(M)


@dataclass(frozen=True)
class ProcessSnapshot:
    """D_M together with the scalars used by the property bundle."""

    M: int
    digraph: Digraph

    @property
    def n(self) -> int:
        return self.digraph.n

    @property
    def d_M(self) -> float:
        return self.M / (2e3 * self.n * math.log(self.n))

    @property
    def p_M(self) -> float:
        return self.M / (self.n * (self.n - 1))

    @property
    def m_M(self) -> float:
        d = self.d_M
        if d == 0:
            return float("inf")
        return self.n * clamped_iterlog(self.n, 3) / (d * math.log(self.n))

    @property
    def low_threshold(self) -> float:
        return 2 * self.d_M * math.log(self.n)

    @property
    def S_M(self) -> frozenset[int]:
        D, t = self.digraph, self.low_threshold
        return frozenset(v for v in range(D.n) if D.out_degree(v) < t or D.in_degree(v) < t)


def snapshot(trace: ProcessTrace, M: int) -> ProcessSnapshot:
    return ProcessSnapshot(M, trace.digraph(M))
