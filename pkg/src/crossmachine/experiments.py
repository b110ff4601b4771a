"""Synthetic studies backing the runtime model and the corrected test.

* synthetic machine fleets whose runtimes follow the linear score model
  with optional multiplicative noise,
* prediction error of the equivalent-runtime estimator (log deviation
  ratio and its ECDF) and runtime correlation between machines,
* type-I inflation of the plain sign test when one side runs longer,
* an adversarial simulation checking the corrected p-value bound.

Every random quantity is drawn from a stream keyed on ``(seed, index)`` so
results are reproducible and do not depend on evaluation order.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ._streams import block_rng, blocks
from .runtime_model import (
    InsufficientDataError,
    MachineScore,
    RuntimeMatrix,
    fit_reference_regression,
)
from .signtest import corrected_p_value, sign_test_p_value

__all__ = [
    "SyntheticFleet",
    "simulate_fleet",
    "synthetic_fleet",
    "log_deviation_ratio",
    "ecdf",
    "ecdf_at",
    "prediction_errors",
    "pairwise_pearson",
    "type1_error_experiment",
    "BoundRow",
    "bound_check_experiment",
]

NOISE_MODELS = ("none", "uniform", "lognormal")


@dataclass(frozen=True)
class SyntheticFleet:
    """Recipe for a runtime matrix.

    ``runtime[m, p] = process_costs[p] * (slope * score_m + intercept) * noise``
    where ``noise`` is 1, ``1 + U(-w, w)`` or ``exp(N(0, sigma))`` for
    ``noise_model`` ``"none"``, ``"uniform"`` and ``"lognormal"``, with
    ``noise_level`` giving ``w`` or ``sigma``.
    """

    machines: tuple[MachineScore, ...]
    process_costs: tuple[float, ...]
    noise_model: str = "none"
    noise_level: float = 0.0
    seed: int = 0
    slope: float = -1.0
    intercept: float = 3223.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "process_costs", tuple(float(c) for c in self.process_costs))
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise model must be one of {NOISE_MODELS}")
        if self.noise_model == "uniform" and not (0 <= self.noise_level < 1):
            raise ValueError("uniform noise width must lie in [0, 1)")
        if self.noise_level < 0:
            raise ValueError("noise level must be non-negative")


_MAX_REDRAWS = 1000


def simulate_fleet(spec: SyntheticFleet) -> RuntimeMatrix:
    if len(spec.machines) < 2 or not spec.process_costs:
        raise InsufficientDataError("a fleet needs at least 2 machines and 1 process")
    scores = np.array([m.score for m in spec.machines])
    base = spec.slope * scores + spec.intercept
    if np.any(base <= 0):
        raise ValueError("the score line is non-positive for some machine")
    costs = np.array(spec.process_costs)
    if np.any(costs <= 0):
        raise ValueError("process costs must be positive")
    runtimes = base[:, None] * costs[None, :]
    if spec.noise_model == "none" or spec.noise_level == 0:
        return RuntimeMatrix(spec.machines, _process_ids(len(costs)), runtimes)

    rng = block_rng(spec.seed, 0)
    shape = runtimes.shape

    def draw(size):
        if spec.noise_model == "uniform":
            return 1.0 + rng.uniform(-spec.noise_level, spec.noise_level, size)
        return np.exp(rng.normal(0.0, spec.noise_level, size))

    noise = draw(shape)
    # redraw offending cells instead of clamping, which would skew the noise
    for _ in range(_MAX_REDRAWS):
        bad = ~(noise * runtimes > 0)
        if not bad.any():
            break
        noise[bad] = draw(int(bad.sum()))
    else:
        raise RuntimeError("could not draw positive runtimes")
    return RuntimeMatrix(spec.machines, _process_ids(len(costs)), runtimes * noise)


def _process_ids(n: int) -> tuple[str, ...]:
    return tuple(f"p{i:03d}" for i in range(n))


def synthetic_fleet(
    n_machines: int = 8,
    n_processes: int = 64,
    noise_model: str = "lognormal",
    noise_level: float = 0.05,
    seed: int = 0,
    score_range: tuple[float, float] = (411.0, 2185.0),
) -> SyntheticFleet:
    """Evenly spaced scores over ``score_range``; process costs log-uniform on [0.2, 5]."""
    scores = np.linspace(score_range[0], score_range[1], n_machines)
    costs = np.exp(block_rng(seed, 1).uniform(math.log(0.2), math.log(5.0), n_processes))
    machines = tuple(MachineScore(f"synthetic-{i}", float(s)) for i, s in enumerate(scores))
    return SyntheticFleet(machines, tuple(costs), noise_model, noise_level, seed)


def log_deviation_ratio(t_hat: float, t: float) -> float:
    """|log2(t_hat / t)|: 0 for a perfect prediction, 1 for double or half."""
    if not (t_hat > 0 and t > 0):
        raise ValueError("runtimes must be positive")
    return abs(math.log2(t_hat / t))


def ecdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Step points ``(x, F(x))`` of the right-continuous empirical CDF."""
    xs = np.sort(np.asarray(values, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("ECDF of an empty sample")
    uniq, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts)
    return [(float(x), int(c) / xs.size) for x, c in zip(uniq, cum)]


def ecdf_at(values: Sequence[float], x: Sequence[float] | np.ndarray) -> np.ndarray:
    xs = np.sort(np.asarray(values, dtype=np.float64))
    return np.searchsorted(xs, np.asarray(x, dtype=np.float64), side="right") / xs.size


def prediction_errors(matrix: RuntimeMatrix, method: str = "equivalent") -> list[float]:
    """Log deviation ratios over all processes and ordered machine pairs.

    ``"equivalent"`` carries each runtime across with the score model fitted
    on the whole matrix; ``"same"`` reuses the runtime unchanged.
    """
    if method not in ("equivalent", "same"):
        raise ValueError("method must be 'equivalent' or 'same'")
    rt = matrix.runtimes
    scores = matrix.scores
    n_mach = rt.shape[0]
    if n_mach < 2:
        raise InsufficientDataError("need at least two machines")
    if method == "equivalent":
        model = fit_reference_regression(zip(scores, matrix.reference_runtimes()))
        alpha = model.alpha
    out: list[float] = []
    for c1 in range(n_mach):
        for c2 in range(n_mach):
            if c1 == c2:
                continue
            if method == "equivalent":
                pred = rt[c1] * ((alpha - scores[c2]) / (alpha - scores[c1]))
            else:
                pred = rt[c1]
            out.extend(np.abs(np.log2(pred / rt[c2])).tolist())
    return out


def pairwise_pearson(matrix: RuntimeMatrix) -> tuple[float, list[tuple[str, str, float]]]:
    """Pearson correlation of the runtime vectors of every machine pair."""
    rt = matrix.runtimes
    n_mach, n_proc = rt.shape
    if n_mach < 2 or n_proc < 2:
        raise InsufficientDataError("need at least 2 machines and 2 processes")
    if np.any(np.ptp(rt, axis=1) == 0):
        raise ValueError("a machine has constant runtimes; correlation is undefined")
    corr = np.corrcoef(rt)
    pairs = [
        (matrix.machines[i].cpu_model, matrix.machines[j].cpu_model, float(corr[i, j]))
        for i in range(n_mach)
        for j in range(i + 1, n_mach)
    ]
    return float(np.mean([r for _, _, r in pairs])), pairs


def _critical_k(n: int, alpha: float) -> int:
    """Largest k rejected by the plain sign test, or -1 if none is."""
    k = -1
    while k + 1 <= n and sign_test_p_value(n, k + 1) <= alpha:
        k += 1
    return k


def type1_error_experiment(
    extra_pct: float,
    n_instances: int = 16,
    reps: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    base_evals: int = 1000,
) -> float:
    """Rejection rate of the plain sign test between two identical random searches.

    Each instance is solved twice by random search (best of i.i.d. uniform
    objective draws). Run B gets ``extra_pct`` percent more evaluations, so
    any rejection of "B is no better than A" is a type-I error caused only
    by the unequal budget.
    """
    if extra_pct < 0:
        raise ValueError("extra runtime must be non-negative")
    if n_instances < 2:
        raise InsufficientDataError("need at least 2 instances")
    if reps < 1:
        raise ValueError("reps must be positive")
    evals_a = int(base_evals)
    evals_b = int(round(base_evals * (1.0 + extra_pct / 100.0)))
    crit = {n: _critical_k(n, alpha) for n in range(1, n_instances + 1)}
    rejected = 0
    for rep in range(reps):
        rng = block_rng(seed, rep)
        a = rng.random((n_instances, evals_a)).min(axis=1)
        b = rng.random((n_instances, evals_b)).min(axis=1)
        n = int(np.count_nonzero(a != b))
        if n == 0:
            continue
        k = int(np.count_nonzero(a < b))
        if k <= crit[n]:
            rejected += 1
    return rejected / reps


@dataclass(frozen=True, slots=True)
class BoundRow:
    k: int
    empirical: float
    std_error: float
    corrected: float
    satisfied: bool


def bound_check_experiment(
    n: int, p_gamma: float, reps: int = 100_000, seed: int = 0
) -> list[BoundRow]:
    """Check P[observed statistic <= k | H0] against the corrected p-value.

    Under H0 the count of A-wins with fair budgets is Bin(n, 1/2). Each win
    is then independently lost with probability ``p_gamma``, the worst case
    of an overshooting runtime estimate; losses never turn into wins.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not (0.0 <= p_gamma < 1.0):
        raise ValueError("p_gamma must lie in [0, 1)")
    if reps < 1:
        raise ValueError("reps must be positive")
    hist = np.zeros(n + 1, dtype=np.int64)
    for rng, size in blocks(seed, reps):
        wins = rng.binomial(n, 0.5, size)
        flipped = rng.binomial(wins, p_gamma)
        hist += np.bincount(wins - flipped, minlength=n + 1)
    cum = np.cumsum(hist)
    rows = []
    for k in range(n + 1):
        emp = int(cum[k]) / reps
        bound = corrected_p_value(p_gamma, n, k)
        # binomial standard error, evaluated at the larger of the two variances so
        # an empirical value of exactly 0 or 1 does not collapse the tolerance
        se = math.sqrt(max(emp * (1.0 - emp), bound * (1.0 - bound)) / reps)
        rows.append(BoundRow(k, emp, se, bound, emp <= bound + 4.0 * se))
    return rows
