import math

import pytest
from hypothesis import given, strategies as st

from crossmachine.binom import BinomialSpec, binom_cdf, binom_pmf, binom_pmf_table

from oracles import exact_cdf, exact_pmf


def test_pmf_examples():
    assert binom_pmf(BinomialSpec(1, 0.5), 0) == 0.5
    assert binom_pmf(BinomialSpec(20, 0.5), 0) == pytest.approx(9.5367431640625e-7, rel=1e-14)
    assert binom_pmf(BinomialSpec(20, 0.1), 20) == pytest.approx(1e-20, rel=1e-13)


def test_cdf_examples():
    spec = BinomialSpec(20, 0.5)
    assert binom_cdf(spec, -1) == 0.0
    assert binom_cdf(spec, 20) == 1.0
    assert binom_cdf(spec, 3) == pytest.approx(1351 / 1048576, abs=1e-15)
    assert float(exact_cdf(20, 0.5, 3)) == 1351 / 1048576


@pytest.mark.parametrize("n, v", [(-1, 0), (3, 4), (3, -1)])
def test_pmf_domain(n, v):
    with pytest.raises(ValueError):
        binom_pmf((n, 0.5), v)


@pytest.mark.parametrize("k", [-2, 21])
def test_cdf_domain(k):
    with pytest.raises(ValueError):
        binom_cdf((20, 0.5), k)


def test_bad_probability():
    with pytest.raises(ValueError):
        BinomialSpec(3, 1.5)


@pytest.mark.parametrize("p", [0.01, 0.1, 0.5])
def test_pmf_sums_to_one(p):
    for n in range(0, 201):
        assert abs(math.fsum(binom_pmf_table((n, p))) - 1.0) <= 1e-12, n


@pytest.mark.parametrize("p", [0.01, 0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [1, 7, 30, 120])
def test_cdf_differences_are_pmf(n, p):
    spec = BinomialSpec(n, p)
    for k in range(n + 1):
        assert binom_cdf(spec, k) - binom_cdf(spec, k - 1) == pytest.approx(
            binom_pmf(spec, k), abs=1e-12
        )


def test_symmetry_is_exact():
    for n in range(0, 301):
        for v in range(n + 1):
            assert binom_pmf((n, 0.5), v) == binom_pmf((n, 0.5), n - v)


def test_large_n_no_overflow():
    table = binom_pmf_table((10000, 0.5))
    assert all(math.isfinite(x) for x in table)
    assert math.fsum(table) == pytest.approx(1.0, abs=1e-9)
    assert binom_pmf((10000, 0.5), 5000) == pytest.approx(0.007978646139382154, rel=1e-9)


def test_degenerate_probabilities():
    assert binom_pmf((5, 0.0), 0) == 1.0
    assert binom_pmf((5, 0.0), 1) == 0.0
    assert binom_pmf((5, 1.0), 5) == 1.0
    assert binom_cdf((5, 0.0), 0) == 1.0


@given(st.integers(0, 60), st.sampled_from([0.01, 0.1, 0.25, 0.5, 0.7]), st.data())
def test_against_exact_rationals(n, p, data):
    v = data.draw(st.integers(0, n))
    assert binom_pmf((n, p), v) == pytest.approx(float(exact_pmf(n, p, v)), rel=1e-11, abs=1e-300)
    assert binom_cdf((n, p), v) == pytest.approx(float(exact_cdf(n, p, v)), abs=1e-12)


@given(st.integers(1, 80), st.floats(0.001, 0.999))
def test_cdf_monotone(n, p):
    values = [binom_cdf((n, p), k) for k in range(-1, n + 1)]
    assert all(b >= a for a, b in zip(values, values[1:]))
