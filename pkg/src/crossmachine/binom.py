"""Exact binomial probabilities evaluated in log space.

Every statistical routine in the package goes through these two functions,
so they are kept small and free of approximations (no normal or continuity
corrections). Terms are formed as ``exp(log C(n, v) + v log p + (n - v) log q)``
with ``log C`` taken from :func:`math.lgamma`, which keeps ``n`` in the
tens of thousands well away from overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["BinomialSpec", "binom_pmf", "binom_cdf", "binom_pmf_table"]


@dataclass(frozen=True, slots=True)
class BinomialSpec:
    n: int
    p: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"trial count must be a non-negative integer, got {self.n!r}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"success probability must lie in [0, 1], got {self.p!r}")


def _as_spec(spec: BinomialSpec | tuple[int, float]) -> BinomialSpec:
    if isinstance(spec, BinomialSpec):
        return spec
    n, p = spec
    return BinomialSpec(int(n), float(p))


def _log_pmf(n: int, p: float, v: int) -> float:
    # the two lgamma terms are added in a fixed order so pmf(v) == pmf(n - v) at p = 0.5
    lo, hi = (v, n - v) if v <= n - v else (n - v, v)
    log_comb = math.lgamma(n + 1) - (math.lgamma(lo + 1) + math.lgamma(hi + 1))
    if p == 0.5:
        return log_comb + n * math.log(0.5)
    return log_comb + v * math.log(p) + (n - v) * math.log1p(-p)


def binom_pmf(spec: BinomialSpec | tuple[int, float], v: int) -> float:
    """P[Bin(n, p) = v].

    >>> binom_pmf(BinomialSpec(20, 0.5), 0)
    9.5367431640625e-07
    """
    spec = _as_spec(spec)
    n, p = spec.n, spec.p
    if not (0 <= v <= n):
        raise ValueError(f"value {v} outside the support 0..{n}")
    # degenerate endpoints: log(0) would poison the sum
    if p == 0.0:
        return 1.0 if v == 0 else 0.0
    if p == 1.0:
        return 1.0 if v == n else 0.0
    return math.exp(_log_pmf(n, p, v))


def binom_pmf_table(spec: BinomialSpec | tuple[int, float]) -> list[float]:
    """All probabilities P[Bin(n, p) = v] for v = 0..n."""
    spec = _as_spec(spec)
    return [binom_pmf(spec, v) for v in range(spec.n + 1)]


def binom_cdf(spec: BinomialSpec | tuple[int, float], k: int) -> float:
    """P[Bin(n, p) <= k].

    ``k = -1`` is accepted and gives 0, which lets callers write strict
    lower tails ``P[X < m]`` as ``binom_cdf(spec, m - 1)`` without special
    cases. ``k = n`` gives exactly 1.
    """
    spec = _as_spec(spec)
    n = spec.n
    if not (-1 <= k <= n):
        raise ValueError(f"cdf argument {k} outside -1..{n}")
    if k == -1:
        return 0.0
    if k == n:
        return 1.0
    total = 0.0
    for v in range(k + 1):
        total += binom_pmf(spec, v)
    return min(total, 1.0)
