"""Acceptance suite: one test per primary criterion, each printing a PASS/FAIL line.

Run on its own with ``python3 -m pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import math
import time
import warnings

import numpy as np
import pytest

from crossmachine.data_io import ComparisonRow, ComparisonTable
from crossmachine.experiments import (
    SyntheticFleet,
    bound_check_experiment,
    pairwise_pearson,
    simulate_fleet,
    synthetic_fleet,
    type1_error_experiment,
)
from crossmachine.runtime_model import (
    CalibrationModel,
    GammaCurve,
    OutOfRangeWarning,
    biased_estimate,
    build_gamma_curve,
    centered_estimate,
    estimate_p_longer,
    gamma_for,
    load_calibration,
)
from crossmachine.signtest import corrected_p_value, corrected_p_value_oracle, run_comparison, sign_statistic

GAMMA_001 = 0.58502
GAMMA_01 = 0.81390
POLE = 3223.0


@pytest.fixture
def report(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


def test_corrected_p_value_exactness(report):
    got = [corrected_p_value(0.1, 20, 3), corrected_p_value(0.01, 17, 4), corrected_p_value(0.1, 15, 15)]
    ok = (
        abs(got[0] - 0.043596000) <= 1e-9
        and abs(got[1] - 0.033192784) <= 1e-9
        and got[2] == 1.0
    )
    report("corrected p-value exactness", ok, f"{got[0]:.9f}, {got[1]:.9f}, {got[2]!r}")


def test_oracle_identity(report):
    reps = 1_000_000
    start = time.perf_counter()
    worst = 0.0
    cells = 0
    for p_gamma in (0.0, 0.01, 0.1, 0.3, 0.7):
        for n in (1, 5, 20, 50):
            for k in sorted({0, n // 4, n // 2, (3 * n) // 4, n}):
                est, _ = corrected_p_value_oracle(p_gamma, n, k, reps, seed=cells)
                exact = corrected_p_value(p_gamma, n, k)
                # use the larger variance so cells with est exactly 0 or 1 keep a tolerance
                se = math.sqrt(max(est * (1 - est), exact * (1 - exact)) / reps)
                z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
                worst = max(worst, z)
                cells += 1
    elapsed = time.perf_counter() - start
    report("oracle identity", worst <= 4.0 and elapsed < 30, f"{cells} cells, max |z| {worst:.2f}, {elapsed:.1f} s")


def test_corrected_bound_holds(report):
    start = time.perf_counter()
    failures = []
    for n in (5, 15, 30):
        for p_gamma in (0.01, 0.1, 0.3):
            rows = bound_check_experiment(n, p_gamma, reps=100_000, seed=n * 100 + int(p_gamma * 100))
            failures += [(n, p_gamma, r.k) for r in rows if not r.satisfied]
    elapsed = time.perf_counter() - start
    report("bound check", not failures and elapsed < 60, f"9 cells, violations {failures}, {elapsed:.1f} s")


def test_example_workflows(report, table2, table3):
    r3 = run_comparison(table3, 0.01, alpha=0.05)
    r2 = run_comparison(table2, 0.01, alpha=0.05)
    ok = (
        (r3.n, r3.k) == (17, 4)
        and abs(r3.corrected_p_value - 0.033192784) <= 1e-9
        and r3.rejected
        and r2.k == r2.n
        and r2.corrected_p_value == 1.0
        and not r2.rejected
    )
    report(
        "example workflows",
        ok,
        f"II: n={r3.n} k={r3.k} p={r3.corrected_p_value:.9f} {r3.decision}; "
        f"I: n={r2.n} k={r2.k} p={r2.corrected_p_value:.9f} {r2.decision}",
    )


def _predict(t1, s1, s2, model, gamma):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfRangeWarning)
        return biased_estimate(t1, s1, s2, model, gamma)


def test_equivalent_runtime_back_fit(report, table2, table3):
    model = CalibrationModel.from_pole(POLE, 411.0, 2185.0)
    # published t1 carries whole seconds in one table and hundredths in the other;
    # every published t_hat2 carries hundredths
    tables = ((table2, 0.5), (table3, 0.005))

    # every printed value, compared at the resolution it was printed with
    worst_gap, count = 0.0, 0
    for table, half in tables:
        for r in table.rows:
            lo = _predict(r.t1 - half, table.s1, table.s2, model, GAMMA_001)
            hi = _predict(r.t1 + half, table.s1, table.s2, model, GAMMA_001)
            gap = max(0.0, (r.t_hat2 - 0.005) - hi, lo - (r.t_hat2 + 0.005))
            worst_gap = max(worst_gap, gap / r.t_hat2)
            count += 1

    # raw relative error where the printed digits are fine enough to carry 0.5%
    raw = [
        abs(_predict(r.t1, t.s1, t.s2, model, GAMMA_001) / r.t_hat2 - 1)
        for t, _ in tables
        for r in t.rows
        if t is table2 or r.t1 >= 5
    ]

    # the two tables back-solve the same gamma to 3 significant digits
    def lsq_gamma(table):
        c = np.array([centered_estimate(r.t1, table.s1, table.s2, model) for r in table.rows])
        y = np.array([r.t_hat2 for r in table.rows])
        return float(c @ y / (c @ c))

    g2, g3 = lsq_gamma(table2), lsq_gamma(table3)
    example = _predict(15.0, 1540, 1643, model, GAMMA_01)
    _, shipped = load_calibration()
    ok = (
        worst_gap <= 0.005
        and max(raw) <= 0.005
        and f"{g2:.3g}" == f"{g3:.3g}"
        and abs(example / 11.461295 - 1) <= 0.005
        and gamma_for(0.01, shipped) == GAMMA_001
        and gamma_for(0.1, shipped) == GAMMA_01
    )
    report(
        "equivalent-runtime back-fit",
        ok,
        f"{count} values within {worst_gap:.4%} at print resolution; "
        f"{len(raw)} raw values max {max(raw):.3%}; gamma(0.01) {g2:.5f} vs {g3:.5f}; "
        f"example {example:.6f} vs 11.461295",
    )


def test_algorithm1_sanity(report):
    start = time.perf_counter()
    base = synthetic_fleet(8, 32, "none", 0.0, seed=1)
    proportional = simulate_fleet(base)
    p_free = estimate_p_longer(1.0, proportional)
    noisy = simulate_fleet(synthetic_fleet(20, 16, "uniform", 0.1, seed=8))
    p_sym = estimate_p_longer(1.0, noisy)
    grid = np.linspace(0.1, 1.0, 10)
    lognormal = simulate_fleet(synthetic_fleet(8, 64, "lognormal", 0.05, seed=0))
    ps = build_gamma_curve(lognormal, grid).p_gammas
    monotone = all(b >= a for a, b in zip(ps, ps[1:]))
    elapsed = time.perf_counter() - start
    ok = p_free == 0.0 and abs(p_sym - 0.5) <= 0.05 and monotone and elapsed < 60
    report(
        "cross-validation sanity",
        ok,
        f"noise-free {p_free}, symmetric {p_sym:.4f}, monotone={monotone} over {len(ps)} points, {elapsed:.1f} s",
    )


def test_type1_inflation(report):
    start = time.perf_counter()
    fair = type1_error_experiment(0, n_instances=16, reps=1000, seed=0)
    unfair = type1_error_experiment(64, n_instances=16, reps=1000, seed=0)
    elapsed = time.perf_counter() - start
    ok = abs(fair - 0.05) <= 0.02 and unfair > fair and elapsed < 120
    report("type-I inflation", ok, f"0% extra {fair:.3f}, 64% extra {unfair:.3f}, {elapsed:.1f} s")


_TRANSFORMS = (
    lambda x, a, b: a * x + b,
    lambda x, a, b: (x - b) ** 3,
    lambda x, a, b: np.sign(x - b) * np.sqrt(np.abs(x - b)),
    lambda x, a, b: np.log1p(np.abs(x - b)) * np.sign(x - b),
    lambda x, a, b: np.exp(np.clip(a * (x - b), -700, 700)),
)


def _random_transform(rng, lo, hi):
    kind = int(rng.integers(len(_TRANSFORMS)))
    scale = max(hi - lo, 1.0)
    a = float(rng.uniform(0.1, 10.0)) / (scale if kind == 4 else 1.0)
    b = float(rng.uniform(lo, hi))
    return lambda x: _TRANSFORMS[kind](np.float64(x), a, b)


def _tables(table2, table3, rng):
    yield table2
    yield table3
    rows = []
    for i in range(int(rng.integers(5, 40))):
        a = float(rng.integers(0, 50))
        b = a if rng.random() < 0.2 else float(rng.integers(0, 50))
        rows.append(ComparisonRow(f"r{i}", 1.0, a, None, b))
    yield ComparisonTable(tuple(rows), str(rng.choice(["minimize", "maximize"])))


def test_invariance(report, table2, table3):
    rng = np.random.default_rng(20240601)
    checked = mismatches = 0
    while checked < 100:
        for table in _tables(table2, table3, rng):
            if checked == 100:
                break
            new_rows = []
            for r in table.rows:
                f = _random_transform(rng, min(r.a, r.b_hat), max(r.a, r.b_hat))
                fa, fb = float(f(r.a)), float(f(r.b_hat))
                assert (fa < fb) == (r.a < r.b_hat) and (fa == fb) == (r.a == r.b_hat)
                new_rows.append(ComparisonRow(r.instance_id, r.t1, fa, None, fb))
            moved = ComparisonTable(tuple(new_rows), table.direction)
            p_gamma = float(rng.choice([0.0, 0.01, 0.1, 0.3]))
            before = run_comparison(table, p_gamma)
            after = run_comparison(moved, p_gamma)
            same = (
                sign_statistic(table.pairs(), table.direction) == sign_statistic(moved.pairs(), moved.direction)
                and before == after
            )
            mismatches += not same
            checked += 1
    report("invariance", mismatches == 0, f"{checked} transform sets, {mismatches} mismatches")


def test_pearson(report):
    mean, _ = pairwise_pearson(simulate_fleet(synthetic_fleet(8, 64, "lognormal", 0.05, seed=0)))
    fleet = synthetic_fleet(8, 64, "none", 0.0, seed=0)
    exact, _ = pairwise_pearson(simulate_fleet(fleet))
    shifted = SyntheticFleet(fleet.machines, fleet.process_costs, slope=-0.3, intercept=900.0)
    exact2, _ = pairwise_pearson(simulate_fleet(shifted))
    ok = mean > 0.98 and abs(exact - 1) <= 1e-12 and abs(exact2 - 1) <= 1e-12
    report("pearson", ok, f"noisy fleet {mean:.6f}, proportional fleets {exact!r}, {exact2!r}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
