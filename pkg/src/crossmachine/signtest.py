"""One-sided sign test and its correction for estimated runtimes.

Orientation is fixed throughout: the statistic ``k`` counts instances on
which the published algorithm A beat the re-run algorithm B, so small ``k``
is evidence that B is better. Rejecting H0 supports "B is better than A"
and nothing else.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ._streams import blocks
from .binom import BinomialSpec, binom_cdf, binom_pmf

if TYPE_CHECKING:
    from .data_io import ComparisonTable

__all__ = [
    "DegenerateSampleError",
    "PairedObservation",
    "SignTestResult",
    "sign_statistic",
    "sign_test_p_value",
    "corrected_p_value",
    "corrected_p_value_oracle",
    "run_comparison",
    "REJECT",
    "FAIL_TO_REJECT",
]

REJECT = "reject_h0"
FAIL_TO_REJECT = "fail_to_reject"
DIRECTIONS = ("minimize", "maximize")


class DegenerateSampleError(ValueError):
    """Raised when tie removal leaves nothing to test."""


@dataclass(frozen=True, slots=True)
class PairedObservation:
    instance_id: str
    a: float
    b_hat: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b_hat)):
            raise ValueError(f"non-finite objective value for instance {self.instance_id!r}")


@dataclass(frozen=True, slots=True)
class SignTestResult:
    n_total: int
    n: int
    k: int
    p_value: float
    corrected_p_value: float
    p_gamma: float
    alpha: float
    decision: str

    @property
    def rejected(self) -> bool:
        return self.decision == REJECT


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def _check_nk(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    if not (0 <= k <= n):
        raise ValueError(f"statistic {k} outside 0..{n}")


def sign_statistic(
    pairs: Iterable[PairedObservation], direction: str = "minimize"
) -> tuple[int, int]:
    """Return ``(n, k)``: untied pairs and the number won by A.

    Ties are exact equality of the stored values. Under ``maximize`` the
    comparison is reversed, which is the same as negating both columns.
    """
    _check_direction(direction)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs given")
    n = k = 0
    for pair in pairs:
        a, b = pair.a, pair.b_hat
        if direction == "maximize":
            a, b = -a, -b
        if a == b:
            continue
        n += 1
        if a < b:
            k += 1
    if n == 0:
        raise DegenerateSampleError(f"all {len(pairs)} pairs are tied; the sign test is undefined")
    return n, k


def sign_test_p_value(n: int, k: int) -> float:
    """Plain one-sided sign-test p-value, P[Bin(n, 1/2) <= k]."""
    _check_nk(n, k)
    return binom_cdf(BinomialSpec(n, 0.5), k)


def corrected_p_value(p_gamma: float, n: int, k: int) -> float:
    """Upper bound on the sign-test p-value when B ran on estimated runtimes.

    Each estimated runtime independently overshoots the true equivalent
    runtime with probability at most ``p_gamma``; every overshoot can turn
    one of A's wins into a loss. The bound is

        sum_v P[Bin(n, p_gamma) >= max(0, v - k)] * P[Bin(n, 1/2) = v].

    With ``p_gamma = 0`` this is exactly :func:`sign_test_p_value`.
    """
    _check_nk(n, k)
    if not (0.0 <= p_gamma < 1.0):
        raise ValueError(f"p_gamma must lie in [0, 1), got {p_gamma!r}")
    if k == n:
        return 1.0
    half = BinomialSpec(n, 0.5)
    flips = BinomialSpec(n, p_gamma)
    total = 0.0
    for v in range(n + 1):
        shortfall = max(0, v - k)
        tail = 1.0 - binom_cdf(flips, shortfall - 1)
        total += tail * binom_pmf(half, v)
    return min(total, 1.0)


def corrected_p_value_oracle(
    p_gamma: float, n: int, k: int, reps: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo estimate of P[V - X <= k], V ~ Bin(n, 1/2), X ~ Bin(n, p_gamma).

    Independent of :func:`corrected_p_value`: nothing here touches the
    binomial kernel. Returns ``(estimate, standard_error)``.
    """
    _check_nk(n, k)
    if reps < 1:
        raise ValueError("reps must be positive")
    if not (0.0 <= p_gamma <= 1.0):
        raise ValueError(f"p_gamma must lie in [0, 1], got {p_gamma!r}")
    hits = 0
    for rng, size in blocks(seed, reps):
        v = rng.binomial(n, 0.5, size)
        x = rng.binomial(n, p_gamma, size)
        hits += int(np.count_nonzero(v - x <= k))
    est = hits / reps
    return est, math.sqrt(est * (1.0 - est) / reps)


def run_comparison(
    table: ComparisonTable | Sequence[PairedObservation],
    p_gamma: float,
    alpha: float = 0.05,
    direction: str | None = None,
) -> SignTestResult:
    """Sign statistic, both p-values and the decision for one comparison.

    ``table`` is a :class:`~crossmachine.data_io.ComparisonTable` (rows
    lacking ``b_hat`` are an error) or a plain sequence of pairs. When
    ``direction`` is omitted the table's own direction is used.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if hasattr(table, "pairs"):
        pairs = table.pairs()
        direction = direction or table.direction
    else:
        pairs = list(table)
    direction = direction or "minimize"
    n, k = sign_statistic(pairs, direction)
    plain = sign_test_p_value(n, k)
    corrected = corrected_p_value(p_gamma, n, k)
    return SignTestResult(
        n_total=len(pairs),
        n=n,
        k=k,
        p_value=plain,
        corrected_p_value=corrected,
        p_gamma=p_gamma,
        alpha=alpha,
        decision=REJECT if corrected <= alpha else FAIL_TO_REJECT,
    )
