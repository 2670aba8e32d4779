import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lifespan.errors import ConvergenceError, DomainError
from lifespan.specfun import (QuadratureSpec, binomial_log_pmf, gaussian_ccdf, integrate,
                              log_gamma_pdf, regularized_lower_gamma, regularized_upper_gamma)
from oracles import binomial_pmf_exact, erlang_cdf, lower_gamma_mp, upper_gamma_mp


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def test_gamma_unit_shape_is_exponential_cdf():
    assert regularized_lower_gamma(1.0, math.log(2.0)) == pytest.approx(0.5, abs=1e-15)
    for x in np.linspace(0.0, 50.0, 201):
        assert abs(regularized_lower_gamma(1.0, x) - (-math.expm1(-x))) <= 1e-12


def test_gamma_at_zero():
    assert regularized_lower_gamma(5.0, 0.0) == 0.0
    assert regularized_upper_gamma(5.0, 0.0) == 1.0


def test_gamma_deep_lower_tail_matches_series_oracle():
    # oracle computed before the build: P(220, 100) ~ 2.97e-25
    want = float(lower_gamma_mp(220, 100))
    got = regularized_lower_gamma(220.0, 100.0)
    assert want == pytest.approx(2.966e-25, rel=1e-3)
    assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("a", range(1, 21))
def test_gamma_matches_erlang_for_integer_shapes(a):
    for x in np.linspace(0.0, 60.0, 121):
        assert abs(regularized_lower_gamma(a, x) - erlang_cdf(a, x)) <= 1e-10


@pytest.mark.parametrize("a", [0.5, 3.7, 50.0, 220.0, 1991.7, 1e4, 1e5])
@pytest.mark.parametrize("ratio", [0.5, 0.9, 1.0, 1.1, 2.0])
def test_gamma_against_arbitrary_precision(a, ratio):
    x = a * ratio
    lower = float(lower_gamma_mp(a, x))
    upper = float(upper_gamma_mp(a, x))
    assert regularized_lower_gamma(a, x) == pytest.approx(lower, rel=1e-9, abs=1e-300)
    assert regularized_upper_gamma(a, x) == pytest.approx(upper, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("a, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5),
                                  (math.nan, 1.0), (1.0, math.inf)])
def test_gamma_rejects_bad_arguments(a, x):
    with pytest.raises(DomainError):
        regularized_lower_gamma(a, x)
    with pytest.raises(DomainError):
        regularized_upper_gamma(a, x)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.05, 5000.0), x=st.floats(0.0, 20000.0))
def test_gamma_halves_sum_to_one(a, x):
    p = regularized_lower_gamma(a, x)
    q = regularized_upper_gamma(a, x)
    assert 0.0 <= p <= 1.0 and 0.0 <= q <= 1.0
    assert p + q == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.1, 3000.0))
def test_gamma_monotone_in_x(a):
    xs = np.linspace(0.0, 3.0 * a + 30.0, 300)
    values = [regularized_lower_gamma(a, x) for x in xs]
    assert all(v2 >= v1 - 1e-15 for v1, v2 in zip(values, values[1:]))


def test_log_gamma_pdf_matches_direct_formula():
    for a, x in [(1.0, 2.0), (3.5, 1.2), (220.0, 210.0), (1991.7, 1900.0)]:
        direct = (a - 1) * math.log(x) - x - math.lgamma(a)
        assert log_gamma_pdf(a, x) == pytest.approx(direct, rel=1e-11, abs=1e-11)


# ---------------------------------------------------------------------------
# normal tail
# ---------------------------------------------------------------------------

def test_gaussian_ccdf_examples():
    assert gaussian_ccdf(0.0) == 0.5
    assert gaussian_ccdf(40.0) < 1e-300
    assert gaussian_ccdf(1.281552) == pytest.approx(0.1, abs=1e-6)


def test_gaussian_ccdf_symmetry_and_reference():
    xs = np.linspace(-8.0, 8.0, 1000)
    values = np.array([gaussian_ccdf(x) for x in xs])
    reference = np.array([0.5 * math.erfc(x / math.sqrt(2.0)) for x in xs])
    assert np.max(np.abs(values - reference)) <= 1e-12
    assert np.all(np.diff(values) <= 0)
    # near x = -8 the value rounds to 1.0, so strictness is checked where it is resolvable
    assert np.all(np.diff(values[xs >= -5.0]) < 0)
    for x in xs:
        assert gaussian_ccdf(x) + gaussian_ccdf(-x) == pytest.approx(1.0, abs=2e-16)


def test_gaussian_ccdf_rejects_non_finite():
    with pytest.raises(DomainError):
        gaussian_ccdf(math.inf)
    with pytest.raises(DomainError):
        gaussian_ccdf(math.nan)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

KNOWN_INTEGRALS = [
    ("x^2", lambda x: x * x, 0.0, 1.0, 1.0 / 3.0),
    ("x^7", lambda x: x ** 7, -1.0, 2.0, (2.0 ** 8 - 1.0) / 8.0),
    ("exp", math.exp, 0.0, 3.0, math.expm1(3.0)),
    ("exp decay", lambda x: math.exp(-x), 0.0, 40.0, -math.expm1(-40.0)),
    ("sin", math.sin, 0.0, math.pi, 2.0),
    ("1/(1+x^2)", lambda x: 1.0 / (1.0 + x * x), -5.0, 5.0, 2.0 * math.atan(5.0)),
    ("(1-x)^-1/2", lambda x: (1.0 - x) ** -0.5, 0.0, 1.0, 2.0),
    ("x^-1/2", lambda x: x ** -0.5, 0.0, 1.0, 2.0),
    ("log x", math.log, 0.0, 1.0, -1.0),
    ("x^-0.9", lambda x: x ** -0.9, 0.0, 1.0, 10.0),
    ("sqrt", math.sqrt, 0.0, 4.0, 16.0 / 3.0),
    ("narrow peak", lambda x: math.exp(-((x - 0.3) / 0.01) ** 2), 0.0, 1.0,
     0.01 * math.sqrt(math.pi) * 0.5 * (math.erf(70.0) + math.erf(30.0))),
    ("far singular end", lambda x: (220.0 - x) ** -0.5, 219.94, 220.0, 2.0 * math.sqrt(0.06)),
]


@pytest.mark.parametrize("name, f, lo, hi, want", KNOWN_INTEGRALS, ids=[k[0] for k in KNOWN_INTEGRALS])
def test_integrate_known_values(name, f, lo, hi, want):
    spec = QuadratureSpec()
    got = integrate(f, lo, hi, spec)
    assert abs(got - want) <= max(spec.abs_tol, spec.rel_tol * abs(want)) * 10


def test_integrate_vectorized_matches_scalar():
    f = lambda x: np.exp(-x) * np.cos(3 * x)
    a = integrate(f, 0.0, 5.0, vectorized=True)
    b = integrate(lambda x: math.exp(-x) * math.cos(3 * x), 0.0, 5.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_integrate_breakpoints_handle_jumps():
    step = lambda x: 1.0 if x < 0.37 else 3.0
    got = integrate(step, 0.0, 1.0, breakpoints=[0.37])
    assert got == pytest.approx(0.37 + 3.0 * 0.63, rel=1e-12)


def test_integrate_reports_failure_with_estimate():
    spec = QuadratureSpec(rel_tol=1e-14, abs_tol=0.0, max_subdivisions=3)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sin(1.0 / x) if x else 0.0, 0.0, 1.0, spec)
    assert math.isfinite(info.value.estimate)
    assert info.value.error > 0


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


# ---------------------------------------------------------------------------
# binomial
# ---------------------------------------------------------------------------

def test_binomial_examples():
    assert binomial_log_pmf(1, 1, 0.3) == pytest.approx(math.log(0.3), rel=1e-15)
    assert binomial_log_pmf(500, 0, 0.04) == pytest.approx(500 * math.log(0.96), rel=1e-13)
    exact = binomial_pmf_exact(500, 20, Fraction(1, 25))
    assert math.exp(binomial_log_pmf(500, 20, 0.04)) == pytest.approx(float(exact), rel=1e-11)


@pytest.mark.parametrize("n", [10, 500, 5000])
@pytest.mark.parametrize("q", [0.01, 0.04, 0.5])
def test_binomial_mass_sums_to_one(n, q):
    total = math.fsum(math.exp(binomial_log_pmf(n, j, q)) for j in range(n + 1))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_binomial_large_n_no_overflow():
    value = binomial_log_pmf(10_000, 5_000, 0.5)
    assert math.isfinite(value)
    assert binomial_log_pmf(10, 3, 0.0) == -math.inf
    assert binomial_log_pmf(10, 10, 1.0) == 0.0


@pytest.mark.parametrize("n, j, q", [(5, 6, 0.5), (5, -1, 0.5), (5, 2, 1.5), (5, 2, -0.1), (5, 2.5, 0.5)])
def test_binomial_rejects_bad_arguments(n, j, q):
    with pytest.raises(DomainError):
        binomial_log_pmf(n, j, q)
