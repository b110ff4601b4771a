"""Equivalent-runtime estimation from single-thread CPU scores.

A reference workload's runtime is modelled as a straight line in the machine
score, ``runtime = slope * score + intercept``. Only the line's root
``alpha = -intercept / slope`` (the "pole") enters the runtime ratio between
two machines::

    t2_hat = t1 * (alpha - s2) / (alpha - s1) * gamma

``gamma`` in (0, 1] shrinks the estimate so that overshooting the true
equivalent runtime happens with a chosen probability ``p_gamma``; the
``gamma <-> p_gamma`` link is a :class:`GammaCurve`, measured by leave-two-out
cross validation over a runtime matrix.
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels

__all__ = [
    "CalibrationModel",
    "GammaCurve",
    "MachineScore",
    "RuntimeMatrix",
    "Applicability",
    "SingularFitError",
    "InsufficientDataError",
    "ExtrapolationError",
    "BeyondPoleError",
    "ImplausibleFitWarning",
    "OutOfRangeWarning",
    "fit_reference_regression",
    "centered_estimate",
    "biased_estimate",
    "gamma_for",
    "estimate_p_longer",
    "build_gamma_curve",
    "check_applicability",
    "calibrate",
    "read_calibration",
    "write_calibration",
    "load_calibration",
    "default_calibration_path",
    "CALIBRATION_ENV",
    "REL_SLACK",
]

CALIBRATION_ENV = "CROSSMACHINE_CALIBRATION"

# t2_hat counts as "longer" only beyond this relative margin, so exact
# predictions on noise-free data are not decided by rounding.
REL_SLACK = 1e-9


class SingularFitError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class ExtrapolationError(ValueError):
    pass


class BeyondPoleError(ValueError):
    """A machine score at or above the pole gives a non-positive runtime."""


class ImplausibleFitWarning(UserWarning):
    pass


class OutOfRangeWarning(UserWarning):
    pass


@dataclass(frozen=True, slots=True)
class MachineScore:
    cpu_model: str
    score: float

    def __post_init__(self) -> None:
        if not self.score > 0:
            raise ValueError(f"score of {self.cpu_model!r} must be positive, got {self.score!r}")


@dataclass(frozen=True)
class RuntimeMatrix:
    """Runtimes (seconds) of every process on every machine, ``runtimes[m, p]``."""

    machines: tuple[MachineScore, ...]
    processes: tuple[str, ...]
    runtimes: np.ndarray

    def __post_init__(self) -> None:
        rt = np.asarray(self.runtimes, dtype=np.float64)
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "processes", tuple(self.processes))
        if rt.shape != (len(self.machines), len(self.processes)):
            raise ValueError(
                f"runtime array has shape {rt.shape}, expected "
                f"({len(self.machines)}, {len(self.processes)})"
            )
        if not np.all(np.isfinite(rt)) or np.any(rt <= 0):
            raise ValueError("all runtimes must be finite and positive")
        rt.flags.writeable = False
        object.__setattr__(self, "runtimes", rt)

    @property
    def scores(self) -> np.ndarray:
        return np.array([m.score for m in self.machines], dtype=np.float64)

    def reference_runtimes(self) -> np.ndarray:
        """Runtime of all processes run back to back, per machine."""
        return self.runtimes.sum(axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuntimeMatrix):
            return NotImplemented
        return (
            self.machines == other.machines
            and self.processes == other.processes
            and np.array_equal(self.runtimes, other.runtimes)
        )


@dataclass(frozen=True, slots=True)
class CalibrationModel:
    slope: float
    intercept: float
    alpha: float
    score_min: float
    score_max: float
    fit_rmse: float = math.nan

    def __post_init__(self) -> None:
        if self.slope == 0 or not math.isfinite(self.slope):
            raise ValueError("calibration slope must be finite and non-zero")
        derived = -self.intercept / self.slope
        if not math.isclose(self.alpha, derived, rel_tol=1e-8):
            raise ValueError(f"alpha {self.alpha!r} disagrees with -intercept/slope = {derived!r}")
        if not self.score_min < self.score_max:
            raise ValueError("score_min must be below score_max")
        if not self.alpha > self.score_max:
            raise ValueError(
                f"pole {self.alpha:g} must lie above the valid score range (max {self.score_max:g})"
            )

    @classmethod
    def from_pole(cls, alpha: float, score_min: float, score_max: float) -> CalibrationModel:
        """Model known only through its pole; the line is normalised to slope -1."""
        return cls(-1.0, float(alpha), float(alpha), float(score_min), float(score_max))

    def rounded(self, digits: int = 9) -> CalibrationModel:
        """Copy with every field rounded to ``digits`` significant digits.

        The pole is recomputed from the rounded line, so the copy survives a
        text round trip unchanged.
        """
        slope = _round_sig(self.slope, digits)
        intercept = _round_sig(self.intercept, digits)
        return CalibrationModel(
            slope=slope,
            intercept=intercept,
            alpha=_round_sig(-intercept / slope, digits),
            score_min=_round_sig(self.score_min, digits),
            score_max=_round_sig(self.score_max, digits),
            fit_rmse=_round_sig(self.fit_rmse, digits),
        )


@dataclass(frozen=True)
class GammaCurve:
    points: tuple[tuple[float, float], ...]
    provenance: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        pts = tuple((float(g), float(p)) for g, p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "provenance", tuple(self.provenance))
        for g, p in pts:
            if not (0.0 < g <= 1.0):
                raise ValueError(f"gamma {g!r} outside (0, 1]")
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"p_gamma {p!r} outside [0, 1]")
        for (g0, p0), (g1, p1) in zip(pts, pts[1:]):
            if not g1 > g0:
                raise ValueError("gamma values must be strictly increasing")
            if p1 < p0:
                raise ValueError("p_gamma must be non-decreasing in gamma")

    @property
    def gammas(self) -> list[float]:
        return [g for g, _ in self.points]

    @property
    def p_gammas(self) -> list[float]:
        return [p for _, p in self.points]


class Applicability(str, enum.Enum):
    OK = "ok"
    WARN_OUT_OF_RANGE = "warn_out_of_range"
    ERROR_BEYOND_POLE = "error_beyond_pole"


def _round_sig(x: float, digits: int = 9) -> float:
    return float(f"{x:.{digits}g}")


def fit_reference_regression(points: Iterable[tuple[float, float]]) -> CalibrationModel:
    """Least-squares line of reference runtime against machine score."""
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise InsufficientDataError("need at least two (score, runtime) points")
    s, t = pts[:, 0], pts[:, 1]
    if np.ptp(s) == 0:
        raise SingularFitError("all scores are identical; the line is not identified")
    s_bar = s.mean()
    ds = s - s_bar
    slope = float(ds @ (t - t.mean()) / (ds @ ds))
    intercept = float(t.mean() - slope * s_bar)
    if slope >= 0:
        warnings.warn(
            f"fitted slope {slope:g} is not negative: faster machines do not run faster",
            ImplausibleFitWarning,
            stacklevel=2,
        )
    resid = t - (slope * s + intercept)
    return CalibrationModel(
        slope=slope,
        intercept=intercept,
        alpha=-intercept / slope,
        score_min=float(s.min()),
        score_max=float(s.max()),
        fit_rmse=float(math.sqrt(np.mean(resid**2))),
    )


def check_applicability(s: float, model: CalibrationModel) -> Applicability:
    if not s > 0:
        raise ValueError(f"machine score must be positive, got {s!r}")
    if s >= model.alpha:
        return Applicability.ERROR_BEYOND_POLE
    if model.score_min <= s <= model.score_max:
        return Applicability.OK
    return Applicability.WARN_OUT_OF_RANGE


def centered_estimate(t1: float, s1: float, s2: float, model: CalibrationModel) -> float:
    """Unbiased equivalent runtime on the machine scoring ``s2``.

    Scores outside the calibrated range emit :class:`OutOfRangeWarning`;
    scores at or past the pole raise :class:`BeyondPoleError`.
    """
    if not t1 > 0:
        raise ValueError(f"runtime must be positive, got {t1!r}")
    for s in (s1, s2):
        status = check_applicability(s, model)
        if status is Applicability.ERROR_BEYOND_POLE:
            raise BeyondPoleError(
                f"score {s:g} is at or beyond the pole {model.alpha:g}; "
                "the estimated runtime would be negative"
            )
        if status is Applicability.WARN_OUT_OF_RANGE:
            warnings.warn(
                f"score {s:g} lies outside the calibrated range "
                f"[{model.score_min:g}, {model.score_max:g}]",
                OutOfRangeWarning,
                stacklevel=2,
            )
    return t1 * (model.alpha - s2) / (model.alpha - s1)


def biased_estimate(
    t1: float, s1: float, s2: float, model: CalibrationModel, gamma: float
) -> float:
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return centered_estimate(t1, s1, s2, model) * gamma


def gamma_for(p_gamma: float, curve: GammaCurve) -> float:
    """Smallest gamma whose interpolated overshoot probability reaches ``p_gamma``.

    Linear between curve points; no extrapolation beyond them.
    """
    pts = curve.points
    if not pts:
        raise ExtrapolationError("gamma curve is empty")
    lo, hi = pts[0][1], pts[-1][1]
    if not (lo <= p_gamma <= hi):
        raise ExtrapolationError(
            f"p_gamma {p_gamma!r} outside the curve's covered range [{lo:g}, {hi:g}]"
        )
    if p_gamma == lo:
        return pts[0][0]
    for (g0, p0), (g1, p1) in zip(pts, pts[1:]):
        if p0 < p_gamma <= p1:
            return g0 + (g1 - g0) * (p_gamma - p0) / (p1 - p0)
    raise AssertionError("unreachable: p_gamma inside the covered range")


def _check_matrix_for_cv(matrix: RuntimeMatrix) -> None:
    n_mach, n_proc = matrix.runtimes.shape
    if n_mach < 4:
        raise InsufficientDataError(
            f"leave-two-out validation needs at least 4 machines, got {n_mach}"
        )
    if n_proc < 2:
        raise InsufficientDataError(f"need at least 2 processes, got {n_proc}")


def _overshoot_fractions(matrix: RuntimeMatrix, gammas: Sequence[float]) -> list[float]:
    _check_matrix_for_cv(matrix)
    counts, total = _kernels.leave_two_out_counts(
        matrix.scores, matrix.runtimes, np.asarray(gammas, dtype=np.float64), REL_SLACK
    )
    return [int(c) / total for c in counts]


def estimate_p_longer(gamma: float, matrix: RuntimeMatrix) -> float:
    """Cross-validated probability that the gamma-shrunk estimate overshoots.

    Every process is held out in turn, and for every ordered pair of
    machines ``(cpu1, cpu2)`` the line is refitted on the remaining machines,
    using as reference runtime the sum of the remaining processes. The
    held-out process's runtime on ``cpu1`` is carried over to ``cpu2`` and
    compared with its measured runtime there.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return _overshoot_fractions(matrix, [gamma])[0]


def build_gamma_curve(
    matrix: RuntimeMatrix, gamma_grid: Sequence[float], provenance: Sequence[str] = ()
) -> GammaCurve:
    grid = [float(g) for g in gamma_grid]
    if not grid:
        warnings.warn("empty gamma grid; returning an empty curve", UserWarning, stacklevel=2)
        return GammaCurve((), tuple(provenance))
    for g in grid:
        if not (0.0 < g <= 1.0):
            raise ValueError(f"gamma {g!r} outside (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma grid must be strictly increasing")
    fractions = _overshoot_fractions(matrix, grid)
    return GammaCurve(tuple(zip(grid, fractions)), tuple(provenance))


def calibrate(
    matrix: RuntimeMatrix, gamma_grid: Sequence[float]
) -> tuple[CalibrationModel, GammaCurve]:
    """Fit the reference line on the whole matrix and measure the gamma curve."""
    _check_matrix_for_cv(matrix)
    model = fit_reference_regression(zip(matrix.scores, matrix.reference_runtimes()))
    n_mach, n_proc = matrix.runtimes.shape
    curve = build_gamma_curve(
        matrix,
        gamma_grid,
        provenance=(
            f"fitted on {n_mach} machines x {n_proc} processes",
            "gamma curve: leave-two-out cross validation, strict overshoot count",
        ),
    )
    return model.rounded(), GammaCurve(
        tuple((_round_sig(g), _round_sig(p)) for g, p in curve.points), curve.provenance
    )


# -- calibration file -------------------------------------------------------

_MODEL_KEYS = ("slope", "intercept", "alpha", "score_min", "score_max", "fit_rmse")


def write_calibration(model: CalibrationModel, curve: GammaCurve) -> str:
    lines = [f"{key} = {getattr(model, key):.9g}" for key in _MODEL_KEYS]
    lines += [f"gamma_point = {g:.9g},{p:.9g}" for g, p in curve.points]
    lines += [f"provenance = {text}" for text in curve.provenance]
    return "\n".join(lines) + "\n"


def read_calibration(text: str) -> tuple[CalibrationModel, GammaCurve]:
    """Parse ``key = value`` lines; ``#`` comments and blank lines are ignored."""
    values: dict[str, float] = {}
    points: list[tuple[float, float]] = []
    provenance: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        try:
            if key == "provenance":
                provenance.append(value)
            elif key == "gamma_point":
                g, p = value.split(",")
                points.append((float(g), float(p)))
            elif key in _MODEL_KEYS:
                if key in values:
                    raise ValueError(f"duplicate key {key!r}")
                values[key] = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    missing = [k for k in _MODEL_KEYS if k not in values]
    if missing:
        raise ValueError(f"calibration file lacks {', '.join(missing)}")
    return CalibrationModel(**values), GammaCurve(tuple(points), tuple(provenance))


def default_calibration_path() -> Path:
    env = os.environ.get(CALIBRATION_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("crossmachine") / "data" / "default_calibration.txt"))


def load_calibration(path: str | os.PathLike | None = None) -> tuple[CalibrationModel, GammaCurve]:
    path = Path(path) if path is not None else default_calibration_path()
    return read_calibration(path.read_text(encoding="utf-8"))

