import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from rvcones.condlimit import (
    DEFAULT_LEVELS,
    CondLimitFit,
    GaussianCondOracle,
    conditional_cdf_empirical,
    conditional_sup_distance,
    empirical_standardize,
    exponential_b_inverse,
    fit_conditioned_limit,
    fit_location_scale,
    gaussian_b,
    gaussian_b_asymptotic,
    gaussian_b_inverse,
    gaussian_norming,
    gaussian_oracle_mu,
    levels_to_thresholds,
    product_form_test,
    psi_estimates,
    standardize_y,
)
from rvcones.errors import (
    DegenerateConditional,
    DomainViolation,
    GridMismatch,
    NonMonotone,
    TooFewExceedances,
)
from rvcones.samplers import RngStream, bivariate_normal_pair


def gaussian_xy(rho, n, seed):
    z = bivariate_normal_pair(rho, RngStream(seed), n)
    return np.column_stack([z[:, 0], standardize_y(z[:, 1], gaussian_b_inverse)])


@pytest.fixture(scope="module")
def xy_half():
    return gaussian_xy(0.5, 1_000_000, 61)


@pytest.fixture(scope="module")
def xy_zero():
    return gaussian_xy(0.0, 1_000_000, 62)


def population_fit(rho, levels=DEFAULT_LEVELS):
    """Exact conditional median and IQR of X given Y* > t for the normal pair."""
    s = math.sqrt(1 - rho * rho)
    beta, scale = [], []
    for t in levels_to_thresholds(levels):
        y0 = gaussian_b(t)

        def cdf(x):
            f = lambda y: stats.norm.pdf(y) * stats.norm.cdf((x - rho * y) / s)
            return integrate.quad(f, y0, np.inf, epsabs=1e-13)[0] / stats.norm.sf(y0)

        q = [optimize.brentq(lambda x: cdf(x) - p, -10, 10, xtol=1e-12) for p in (0.25, 0.5, 0.75)]
        beta.append(q[1])
        scale.append(q[2] - q[0])
    return CondLimitFit(levels_to_thresholds(levels), np.array(beta), np.array(scale),
                        np.zeros(len(levels)))


# --- oracle --------------------------------------------------------------

def test_oracle_examples():
    o0 = GaussianCondOracle(0.0)
    for x, y in [(-1.0, 1.0), (0.3, 2.0), (2.0, 7.0)]:
        assert gaussian_oracle_mu(o0, x, y) == pytest.approx(stats.norm.cdf(x) / y, rel=1e-15)
    assert gaussian_oracle_mu(GaussianCondOracle(0.3), math.inf, 1.0) == 1.0
    assert gaussian_oracle_mu(GaussianCondOracle(0.6), 0.0, 2.0) == 0.25
    with pytest.raises(DomainViolation):
        GaussianCondOracle(1.0)
    with pytest.raises(DomainViolation):
        gaussian_oracle_mu(o0, 0.0, 0.0)


@given(st.floats(-0.99, 0.99), st.floats(-20, 20), st.floats(1e-3, 1e3), st.floats(0, 5), st.floats(0, 5))
def test_oracle_monotone_and_product(rho, x, y, dx, dy):
    o = GaussianCondOracle(rho)
    assert gaussian_oracle_mu(o, x + dx, y) >= gaussian_oracle_mu(o, x, y)
    assert gaussian_oracle_mu(o, x, y + dy) <= gaussian_oracle_mu(o, x, y)
    assert gaussian_oracle_mu(o, x, y) == gaussian_oracle_mu(o, x, 1.0) * (1.0 / y)


@pytest.mark.parametrize("t", [1.5, 10.0, 1e3, 1e6, 1e12])
def test_gaussian_b_exact_quantile(t):
    b = gaussian_b(t)
    assert t * stats.norm.sf(b) == pytest.approx(1.0, abs=1e-10)
    a, b2 = gaussian_norming(t)
    assert b2 == b and a == 1 / math.sqrt(2 * math.log(t))


def test_gaussian_b_asymptotic_cross_check():
    errs = [abs(gaussian_b_asymptotic(t) - gaussian_b(t)) * math.sqrt(2 * math.log(t))
            for t in (1e3, 1e6, 1e12, 1e24)]
    assert np.all(np.diff(errs) < 0)


def test_gumbel_norming_converges():
    # t P[N > b(t) + a(t) x] -> e^-x; convergence is of order 1/log t
    ts = [1e3, 1e6, 1e9, 1e12]
    for x in (-1.0, 0.0, 1.0):
        errs = []
        for t in ts:
            a, b = gaussian_norming(t)
            errs.append(abs(t * stats.norm.sf(b + a * x) * math.exp(x) - 1))
        if x == 0:
            assert max(errs) < 1e-10
        else:
            assert np.all(np.diff(errs) < 0)
            assert errs[1] < 0.1


# --- standardization -----------------------------------------------------

def test_standardize_examples():
    y = np.array([-1.0, 0.0, 2.5])
    np.testing.assert_allclose(standardize_y(y, exponential_b_inverse), np.exp(y), rtol=1e-15)
    np.testing.assert_array_equal(standardize_y(y, lambda v: v), y)
    g = np.linspace(-3, 8, 50)
    ys = standardize_y(g, gaussian_b_inverse)
    mpmath.mp.dps = 40
    direct = [float(1 / (1 - mpmath.ncdf(v))) for v in g]
    np.testing.assert_allclose(ys, direct, rtol=1e-8)
    np.testing.assert_allclose([gaussian_b(v) for v in ys[ys > 1]], g[ys > 1], atol=1e-8)
    with pytest.raises(NonMonotone):
        standardize_y(y, lambda v: -v)


@given(st.lists(st.floats(-8, 8), min_size=2, max_size=50))
def test_standardize_preserves_ranks(values):
    y = np.array(values)
    order = np.argsort(y, kind="stable")
    for f in (lambda v: standardize_y(v, gaussian_b_inverse), empirical_standardize):
        ys = f(y)
        assert np.all(np.diff(ys[order]) >= 0)
    # rank standardization keeps ranks exactly, ties included
    np.testing.assert_array_equal(stats.rankdata(y, "max"), stats.rankdata(empirical_standardize(y), "max"))


# --- location / scale ----------------------------------------------------

def test_fit_independent_flat(xy_zero):
    fit = fit_location_scale(xy_zero)
    np.testing.assert_allclose(fit.beta_hat, 0.0, atol=0.05)
    np.testing.assert_allclose(fit.alpha_scale_hat, 1.349, atol=0.06)


def test_fit_tracks_rho_b(xy_half):
    fit = fit_location_scale(xy_half)
    pop = population_fit(0.5)
    # median standard error ~ 1.25 sigma / sqrt(m)
    band = 4 * 1.25 / np.sqrt(fit.exceedances)
    np.testing.assert_array_less(np.abs(fit.beta_hat - pop.beta_hat), band)
    rb = 0.5 * np.array([gaussian_b(t) for t in fit.thresholds])
    assert np.all(np.diff(fit.beta_hat) > 0)
    np.testing.assert_allclose(fit.beta_hat, rb, atol=0.3)


def test_fit_errors():
    xy = np.column_stack([np.zeros(5000), empirical_standardize(np.arange(5000.0))])
    with pytest.raises(DegenerateConditional):
        fit_location_scale(xy)
    with pytest.raises(TooFewExceedances):
        fit_location_scale(xy[:500])


# --- psi tables and product form ----------------------------------------

def test_psi_c_one_exact(xy_half):
    fit = fit_location_scale(xy_half)
    p1, p2 = psi_estimates(fit, [1.0])
    assert p1[0] == 1.0 and p2[0] == 0.0


def test_psi_synthetic_power():
    t = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    fit = CondLimitFit(t, np.sqrt(t), np.sqrt(t), np.full(5, 1000))
    c = np.array([2.0, 4.0])
    p1, p2 = psi_estimates(fit, c)
    np.testing.assert_allclose(p1, np.sqrt(c), rtol=1e-14)
    np.testing.assert_allclose(p2, np.sqrt(c) - 1, rtol=1e-14)
    assert not product_form_test(p1, p2, 0.1)
    assert product_form_test([1.0, 1.0], [0.0, 0.0], 0.1)
    with pytest.raises(GridMismatch):
        psi_estimates(fit, [3.0])


def test_psi_gaussian_matches_population(xy_half):
    fit = fit_location_scale(xy_half)
    pop = population_fit(0.5)
    c = [2.0, 4.0]
    p1, p2 = psi_estimates(fit, c)
    q1, q2 = psi_estimates(pop, c)
    np.testing.assert_allclose(p1, q1, atol=0.05)
    np.testing.assert_allclose(p2, q2, atol=0.05)
    assert np.all(np.abs(q1 - 1) < 0.1)


def test_psi_population_drifts_to_product_form():
    # the location jump beta(tc) - beta(t) shrinks like log c / b(t)
    lo = psi_estimates(population_fit(0.5, (0.9, 0.95, 0.975)), [2.0])[1][0]
    hi = psi_estimates(population_fit(0.5, (0.999, 0.9995, 0.99975)), [2.0])[1][0]
    assert 0 < hi < lo


def test_fit_conditioned_limit_fields(xy_zero):
    fit = fit_conditioned_limit(xy_zero)
    assert fit.psi1_table.shape == (3,) and fit.product_verdict is True


# --- conditional cdf -----------------------------------------------------

def test_conditional_cdf_independent(xy_zero):
    d, m = conditional_sup_distance(xy_zero, 100.0, stats.norm.cdf)
    assert m >= 1000 and d < 0.05
    grid = np.linspace(-3, 3, 13)
    emp = conditional_cdf_empirical(xy_zero, 100.0, grid)
    assert np.max(np.abs(emp - stats.norm.cdf(grid))) < 0.05


def test_conditional_cdf_constant_x():
    xy = np.column_stack([np.full(2000, 1.5), empirical_standardize(np.arange(2000.0))])
    emp = conditional_cdf_empirical(xy, 10.0, [1.0, 1.4999, 1.5, 3.0])
    np.testing.assert_array_equal(emp, [0.0, 0.0, 1.0, 1.0])
