import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import digamma, gamma as gamma_fn

import rbtll as R
from rbtll import HazardShape, RbtllParams
from rbtll import distribution as D

from conftest import random_thetas

thetas = st.builds(
    RbtllParams,
    st.floats(-4, 4),
    st.floats(0.2, 6),
    st.floats(1e-3, 1 - 1e-3),
)


def _log_quad(fun_of_x, th, upper=math.inf):
    """Integral over (0, upper) of fun_of_x, substituting x = e^t."""
    top = math.log(upper) if upper < math.inf else np.inf
    m = min(math.log(R.quantile(0.5, th)), top)

    def g(t):
        if abs(t) > 700:
            return 0.0
        x = math.exp(t)
        return fun_of_x(x) * x

    return sum(integrate.quad(g, a, b, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
               for a, b in ((-np.inf, m), (m, top)) if a < b)


# ---- parameters ---------------------------------------------------------

@pytest.mark.parametrize("bad", [(0, 0, 0.5), (0, -1, 0.5), (0, 1, 0), (0, 1, 1), (math.inf, 1, 0.5), (0, 1, math.nan)])
def test_params_validation(bad):
    with pytest.raises(R.DomainError):
        RbtllParams(*bad)


def test_support_validation():
    with pytest.raises(R.DomainError):
        R.pdf(0.0, (0, 1, 0.5))
    with pytest.raises(R.DomainError):
        R.cdf([-1.0, 2.0], (0, 1, 0.5))


# ---- cdf / survival -----------------------------------------------------

@pytest.mark.parametrize("gamma, upsilon", [(0.0, 1.0), (3.0, 1.5), (-2.0, 0.4)])
def test_cdf_at_base_median(gamma, upsilon):
    th = (gamma, upsilon, 0.5)
    x = math.exp(-gamma / upsilon)
    expected = 0.5 - 0.25 * math.log(2.0)
    assert R.cdf(x, th) == pytest.approx(expected, abs=1e-15)
    assert R.survival(x, th) == pytest.approx(1 - expected, abs=1e-15)
    # quadrature of the density gives the same number
    assert _log_quad(lambda t: R.pdf(t, th), th, upper=x) == pytest.approx(expected, abs=1e-9)


def test_cdf_limits():
    th = (1.0, 0.7, 0.4)
    assert R.cdf(1e-200, th) == pytest.approx(0.0, abs=1e-50)
    assert R.cdf(np.inf, th) == 1.0
    assert R.survival(np.inf, th) == 0.0
    assert R.survival(1e200, th) < 1e-100


def test_survival_complements_cdf():
    for th in random_thetas(10, 1):
        x = np.logspace(-6, 6, 200)
        assert np.max(np.abs(R.survival(x, th) + R.cdf(x, th) - 1.0)) <= 1e-14


def test_survival_keeps_precision_in_tail():
    # S = (1-G)(1 + p log(1+z)); at z = 1e30 that is about 1e-30 * (1 + p*69)
    th = (0.0, 1.0, 0.5)
    x = 1e30
    L = math.log1p(x)
    assert R.survival(x, th) == pytest.approx((1 + 0.5 * L) / (1 + x), rel=1e-12)


def test_pdf_matches_cdf_derivative():
    for th in random_thetas(10, 2):
        x = np.exp(np.linspace(math.log(R.quantile(0.01, th)), math.log(R.quantile(0.99, th)), 25))
        h = 1e-5 * x
        fd = (np.asarray(R.cdf(x + h, th)) - np.asarray(R.cdf(x - h, th))) / (2 * h)
        assert np.allclose(fd, R.pdf(x, th), rtol=1e-6, atol=0)
        # and at x = 1 with a tighter step
        fd1 = (R.cdf(1 + 1e-6, th) - R.cdf(1 - 1e-6, th)) / 2e-6
        assert fd1 == pytest.approx(R.pdf(1.0, th), rel=1e-6, abs=1e-9)


def test_pdf_vanishes_at_zero_when_shape_above_one():
    assert R.pdf(1e-12, (0.5, 1.8, 0.3)) < 1e-8


def test_pump_log_likelihood():
    th = (1.0253, 1.3240, 0.3483)
    ll = float(np.sum(R.logpdf(R.builtin("pump").values, th)))
    assert -2 * ll == pytest.approx(65.2329, abs=0.01)


def test_small_p_reduces_to_loglogistic():
    th = RbtllParams(0.7, 1.3, 1e-10)
    x = np.logspace(-4, 4, 300)
    ll = 1.0 / (1.0 + (x / th.ll_scale) ** (-th.upsilon))
    assert np.max(np.abs(R.cdf(x, th) - ll)) <= 1e-8


def test_normalisation_by_quadrature():
    for th in random_thetas(20, 3):
        assert _log_quad(lambda x: R.pdf(x, th), th) == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(thetas, st.lists(st.floats(-30, 30), min_size=2, max_size=30))
def test_cdf_monotone(th, logs):
    x = np.exp(np.sort(np.array(logs)))
    F = R.cdf(x, th)
    assert np.all(np.diff(F) >= 0)
    assert np.all((F >= 0) & (F <= 1))


# ---- quantile -----------------------------------------------------------

def test_quantile_inverts_base_median_example():
    th = (1.3, 0.8, 0.5)
    u = 0.5 - 0.25 * math.log(2.0)
    assert R.quantile(u, th) == pytest.approx(math.exp(-1.3 / 0.8), rel=1e-12)


@pytest.mark.parametrize("x0", [0.1, 1.0, 10.0])
def test_quantile_round_trip_in_x(x0):
    th = (0.4, 1.7, 0.6)
    assert R.quantile(R.cdf(x0, th), th) == pytest.approx(x0, rel=1e-10)


def test_quantile_against_bisection():
    th = (3.0, 1.5, 0.75)
    lo, hi = math.log(1e-12), math.log(1e12)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if R.cdf(math.exp(mid), th) < 0.5 else (lo, mid)
    assert R.quantile(0.5, th) == pytest.approx(math.exp(lo), abs=1e-9)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.5, 0.999999, 1 - 1e-12])
def test_quantile_round_trip_near_parameter_edges(p):
    th = (0.3, 0.9, p)
    u = np.array([1e-12, 1e-6, 0.1, 0.5, 0.9, 1 - 1e-6, 1 - 1e-12])
    assert np.max(np.abs(R.cdf(R.quantile(u, th), th) - u)) <= 1e-10


@pytest.mark.parametrize("u", [0.0, 1.0, -0.2, math.nan])
def test_quantile_domain(u):
    with pytest.raises(R.DomainError):
        R.quantile(u, (0, 1, 0.5))


@settings(max_examples=200, deadline=None)
@given(thetas, st.floats(1e-9, 1 - 1e-9))
def test_quantile_round_trip_property(th, u):
    assert abs(R.cdf(R.quantile(u, th), th) - u) <= 1e-10


# ---- hazard and its log-derivative --------------------------------------

def test_hazard_is_pdf_over_survival():
    for th in random_thetas(5, 4):
        x = np.exp(np.linspace(math.log(R.quantile(1e-4, th)), math.log(R.quantile(1 - 1e-6, th)), 100))
        assert np.allclose(R.hazard(x, th), R.pdf(x, th) / R.survival(x, th), rtol=1e-10, atol=0)


def test_hazard_hand_computed_point():
    # theta = (0, 1, 0.5), x = 1: z = 1, G = 1/2, L = log 2
    L = math.log(2.0)
    f = 0.25 * (0.5 + 0.5 * L)
    S = 0.5 * (1 + 0.5 * L)
    assert R.hazard(1.0, (0.0, 1.0, 0.5)) == pytest.approx(f / S, rel=1e-14)


def test_hazard_decreasing_for_shape_below_one():
    x = np.logspace(-4, 4, 300)
    h = R.hazard(x, (3.0, 0.5, 0.2))
    assert np.all(np.diff(h) < 0)


def test_psi_matches_finite_difference():
    th = (1.0, 2.0, 0.3)
    x, eps = 2.0, 1e-5
    fd = (math.log(R.hazard(x + eps, th)) - math.log(R.hazard(x - eps, th))) / (2 * eps)
    assert R.psi(x, th) == pytest.approx(fd, rel=1e-5)
    for th in random_thetas(10, 5):
        xs = np.asarray(R.quantile(np.array([0.05, 0.3, 0.6, 0.9]), th))
        h = 1e-6 * xs
        fd = (np.log(R.hazard(xs + h, th)) - np.log(R.hazard(xs - h, th))) / (2 * h)
        assert np.allclose(R.psi(xs, th), fd, rtol=1e-5, atol=1e-8)


def test_psi_negative_when_shape_below_one():
    x = np.logspace(-3, 3, 50)
    assert np.all(np.asarray(R.psi(x, (0.5, 0.6, 0.3))) < 0)


def test_psi_positive_near_origin_but_eventually_negative_when_shape_above_one():
    th = RbtllParams(3.0, 2.0, 0.2)
    x_small = th.ll_scale * np.logspace(-4, -1, 20)
    assert np.all(np.asarray(R.psi(x_small, th)) > 0)
    # x psi -> -1 as x -> inf, whatever upsilon is
    assert R.psi(1e100, th) * 1e100 == pytest.approx(-1.0, abs=1e-3)


def test_classify_examples():
    assert R.classify_hazard_shape((3.0, 0.5, 0.2)) is HazardShape.DECREASING
    assert R.classify_hazard_shape((0.0, 1.0, 0.9)) is HazardShape.NON_MONOTONE
    assert R.classify_hazard_shape((0.0, 1.0, 0.5)) is HazardShape.DECREASING


def test_shape_above_one_is_unimodal_not_increasing():
    th = RbtllParams(3.0, 2.0, 0.2)
    assert R.classify_hazard_shape(th) is HazardShape.NON_MONOTONE
    x = np.logspace(-3, 4, 400)
    h = np.asarray(R.hazard(x, th))
    k = int(np.argmax(h))
    assert 0 < k < x.size - 1
    assert np.all(np.diff(h[: k + 1]) > 0) and np.all(np.diff(h[k:]) < 0)
    turns = D.hazard_turning_points(th)
    assert turns.size == 1 and turns[0] == pytest.approx(x[k], rel=0.05)


def test_shape_below_one_can_be_non_monotone_for_large_p():
    th = (0.0, 0.9, 0.95)
    assert R.classify_hazard_shape(th) is HazardShape.NON_MONOTONE
    assert D.hazard_turning_points(th).size >= 1


def test_increasing_never_returned():
    for th in random_thetas(60, 6, upsilon=(0.1, 20)):
        assert R.classify_hazard_shape(th) is not HazardShape.INCREASING


# ---- moments ------------------------------------------------------------

def _moment_closed_form(r, th):
    a = r / th.upsilon
    return (math.exp(-r * th.gamma / th.upsilon) * gamma_fn(1 + a) * gamma_fn(1 - a)
            * (1 - th.p + th.p * (digamma(2.0) - digamma(1 - a))))


def test_zeroth_moment_is_one():
    for th in random_thetas(5, 7):
        assert R.raw_moment(0, th) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("th", [RbtllParams(3, 1.5, 0.75), RbtllParams(-1, 3.2, 0.1), RbtllParams(0.5, 5.0, 0.9)])
def test_moments_against_closed_form(th):
    for r in range(0, int(math.ceil(th.upsilon))):
        if r < th.upsilon:
            assert R.raw_moment(r, th) == pytest.approx(_moment_closed_form(r, th), rel=1e-8)


def test_moment_monte_carlo():
    th = RbtllParams(3.0, 1.5, 0.75)
    x = R.sample(th, 10**6, R.RngStream(11)).values
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - R.raw_moment(1, th)) <= 4 * se


def test_moment_existence_guard():
    with pytest.raises(R.MomentNotFiniteError):
        R.raw_moment(2, (1.5, 2.0, 0.4))
    with pytest.raises(R.DomainError):
        R.raw_moment(1.5, (1.5, 4.0, 0.4))


# ---- order statistics ---------------------------------------------------

def test_order_statistic_single_observation_is_pdf():
    th = (0.2, 1.1, 0.4)
    x = np.logspace(-2, 2, 30)
    assert np.allclose(R.order_statistic_pdf(x, 1, 1, th), R.pdf(x, th), rtol=1e-14, atol=0)


def test_order_statistic_maximum():
    th = (0.2, 1.1, 0.4)
    x = np.logspace(-2, 2, 30)
    n = 7
    direct = n * np.asarray(R.cdf(x, th)) ** (n - 1) * np.asarray(R.pdf(x, th))
    assert np.allclose(R.order_statistic_pdf(x, n, n, th), direct, rtol=1e-12)


@pytest.mark.parametrize("r, n", [(1, 5), (3, 5), (10, 10)])
def test_order_statistic_integrates_to_one(r, n):
    th = RbtllParams(0.5, 1.4, 0.6)
    assert _log_quad(lambda x: R.order_statistic_pdf(x, r, n, th), th) == pytest.approx(1.0, abs=1e-6)


def test_order_statistic_minimum_monte_carlo():
    th = RbtllParams(0.5, 1.4, 0.6)
    trials = 10**6
    mins = R.sample(th, 5 * trials, R.RngStream(5)).values.reshape(trials, 5).min(axis=1)
    edges = np.asarray(R.quantile(np.linspace(0.02, 0.7, 11), th))
    counts, _ = np.histogram(mins, edges)
    for a, b, c in zip(edges[:-1], edges[1:], counts):
        prob = integrate.quad(lambda x: R.order_statistic_pdf(x, 1, 5, th), a, b, epsabs=1e-12)[0]
        se = math.sqrt(prob * (1 - prob) / trials)
        assert abs(c / trials - prob) <= 3 * se


def test_order_statistic_domain():
    with pytest.raises(R.DomainError):
        R.order_statistic_pdf(1.0, 0, 3, (0, 1, 0.5))
    with pytest.raises(R.DomainError):
        R.order_statistic_pdf(1.0, 4, 3, (0, 1, 0.5))


# ---- likelihood-ratio order --------------------------------------------

def test_lr_ratio_identity():
    x = np.logspace(-3, 3, 50)
    assert np.allclose(R.lr_ratio(x, (1, 2, 0.4), (1, 2, 0.4)), 1.0)


def test_lr_ratio_example_and_definition():
    t1, t2 = (1.0, 1.0, 0.2), (1.0, 1.0, 0.8)
    assert R.lr_ratio(0.1, t1, t2) > R.lr_ratio(10.0, t1, t2)
    x = np.logspace(-2, 2, 40)
    assert np.allclose(R.lr_ratio(x, t1, t2), R.pdf(x, t1) / R.pdf(x, t2), rtol=1e-12)


def test_lr_ratio_derivative_sign():
    t1, t2 = (0.3, 1.6, 0.1), (0.3, 1.6, 0.7)
    d = (R.lr_ratio(1 + 1e-6, t1, t2) - R.lr_ratio(1 - 1e-6, t1, t2)) / 2e-6
    assert d < 0


def test_lr_ratio_needs_shared_base():
    with pytest.raises(R.DomainError):
        R.lr_ratio(1.0, (0, 1, 0.2), (0.1, 1, 0.5))
    with pytest.raises(R.DomainError):
        R.lr_ratio(1.0, (0, 1, 0.2), (0, 1.1, 0.5))
