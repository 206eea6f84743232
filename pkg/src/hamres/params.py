"""Scalar thresholds shared by the certificate checks and the construction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


def iterlog(n: float, k: int) -> float:
    """k-fold natural log of n, or -inf once the argument leaves (0, inf)."""
    x = float(n)
    for _ in range(k):
        if x <= 0:
            return float("-inf")
        x = math.log(x)
    return x


def clamped_iterlog(n: float, k: int) -> float:
    return max(1.0, iterlog(n, k))


def default_surrogates(n: int) -> dict[int, float]:
    return {k: clamped_iterlog(n, k) for k in range(2, 8)}


@dataclass
class ParameterProfile:
    """Density d, slack eps and the derived set size m for an n-vertex digraph.

    The iterated logs log^[k] n (k = 2..7) are replaced by `lg[k]`, which
    default to the literal values clamped below at 1.
    """

    n: int
    d: float
    eps: float
    m: int | None = None
    lg: dict[int, float] = field(default_factory=dict)
    exhaustive_cap: int = 14
    min_n: int | None = None
    a2_factor: float = 10.0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("profile needs n >= 2")
        base = default_surrogates(self.n)
        base.update({int(k): float(v) for k, v in self.lg.items()})
        if any(v < 1 for v in base.values()):
            raise ValueError("iterated-log surrogates must be >= 1")
        self.lg = base
        if self.m is None:
            self.m = max(1, int(self.m_formula))
        if self.m <= 0:
            raise ValueError("m must be positive")

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def m_formula(self) -> float:
        return self.n * self.lg[3] / (self.d * self.log_n)

    # A1
    @property
    def min_degree(self) -> float:
        return self.d * self.log_n

    @property
    def max_degree(self) -> float:
        return 1e6 * self.d * self.log_n

    # A2
    @property
    def a2_degree(self) -> float:
        return self.d * self.lg[2] / self.lg[4]

    # A3
    @property
    def a3_degree(self) -> float:
        return self.d * self.log_n ** (2 / 3)

    @property
    def a3_factor(self) -> float:
        return self.log_n ** (1 / 3)

    # A4
    @property
    def a4_target(self) -> float:
        return (0.5 + self.eps) * self.n

    def thresholds(self) -> dict[str, float]:
        return {
            "d": self.d,
            "eps": self.eps,
            "m": self.m,
            "a1_min": self.min_degree,
            "a1_max": self.max_degree,
            "a2_degree": self.a2_degree,
            "a2_factor": self.a2_factor,
            "a3_degree": self.a3_degree,
            "a3_factor": self.a3_factor,
            "a4_target": self.a4_target,
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lg"] = {str(k): v for k, v in self.lg.items()}
        return out


def desk_sizes(n: int, eps: float) -> dict[str, int]:
    """Small-n replacements for the reservoir/path-count parameters."""
    return {
        "r": max(2, math.ceil(n / 40)),
        "ell": max(4, math.ceil(n / 20)),
        "a": math.ceil(eps * n / 40),
        "k": 3,
    }


def strong_d0(n: int) -> int:
    return max(3, math.ceil(math.log(n) ** (1 / 3)))


WEAK_D0 = 10
RETRY_CAP = 5
