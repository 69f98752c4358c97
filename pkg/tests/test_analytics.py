import math

import numpy as np
import pytest
from scipy import integrate

from tincell.errors import DegenerateConditioningError, DomainError
from tincell.models.network import NetworkParams, TinParams
from tincell.services import analytics
from tincell.services.conditions import tin_radius_kink
from tincell.services.numerics import integrate_finite, interference_tail_integral

CLASSICAL = analytics.CLASSICAL


@pytest.fixture
def noiseless_net() -> NetworkParams:
    return NetworkParams.from_beta(lambda_b=5.0, beta=1e30, alpha=4.0)


def test_prob_tin_is_one_without_tin(macro_net):
    result = analytics.prob_tin(macro_net, CLASSICAL)
    assert result.value == 1.0
    assert result.est_error == 0.0
    assert analytics.prob_tin(macro_net, TinParams(m_factor=7.0, mu=2.0)).value == 1.0


def test_prob_tin_vanishes_at_mu_one(macro_net):
    assert analytics.prob_tin(macro_net, TinParams(mu=1.0)).value < 1e-6


def test_prob_tin_grows_with_mu_and_m(macro_net):
    values = [
        analytics.prob_tin(macro_net, TinParams(mu=mu)).value
        for mu in np.linspace(1.0, 2.0, 11)
    ]
    assert all(b >= a for a, b in zip(values, values[1:]))
    relaxed = analytics.prob_tin(macro_net, TinParams(m_factor=10, mu=1.8)).value
    assert relaxed > values[8]


def test_prob_tin_falls_with_density(tin18):
    values = [
        analytics.prob_tin(NetworkParams.from_beta(lam, 10**15.6, 4.0), tin18).value
        for lam in (1.0, 5.0, 10.0)
    ]
    assert values[0] > values[1] > values[2]


def test_prob_tin_rises_with_alpha(tin18):
    values = [
        analytics.prob_tin(NetworkParams.from_beta(5.0, 10**15.6, a), tin18).value
        for a in (3.0, 3.5, 4.0, 4.5)
    ]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_conditional_pdf_reduces_to_nearest_bs_law(macro_net):
    x = np.linspace(0.01, 0.8, 25)
    lam = math.pi * macro_net.lambda_b
    expected = 2 * lam * x * np.exp(-lam * x**2)
    got = analytics.conditional_pdf_x11(x, macro_net, CLASSICAL, 1.0)
    np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_conditional_pdf_integrates_to_one(macro_net):
    tin = TinParams(mu=1.5)
    p_a = analytics.prob_tin(macro_net, tin).value
    q = integrate_finite(
        lambda x: analytics.conditional_pdf_x11(x, macro_net, tin, p_a),
        0.0,
        analytics.x11_cutoff(macro_net, tin),
        breakpoints=(tin_radius_kink(macro_net, tin),),
    )
    assert q.value == pytest.approx(1.0, rel=1e-6)


def test_conditioning_on_a_null_event_raises(macro_net, tin18):
    with pytest.raises(DegenerateConditioningError):
        analytics.conditional_pdf_x11(0.1, macro_net, tin18, 0.0)
    with pytest.raises(DegenerateConditioningError):
        analytics.coverage_active(10.0, macro_net, tin18, p_a=1e-15)
    with pytest.raises(DegenerateConditioningError):
        analytics.rate_active(macro_net, tin18, p_a=1e-15)


def test_interferer_density_is_zero_inside_the_ball(macro_net, tin18):
    assert analytics.interferer_density(0.5, 0.1, macro_net, tin18, 0.3) == 0.0
    far = analytics.interferer_density(2e4, 0.1, macro_net, tin18, 0.3)
    assert far == pytest.approx(1.5)


def test_joint_pdf_is_a_density():
    lam = 2.0
    total, _ = integrate.dblquad(
        lambda x11, x21: analytics.distance_joint_pdf(x11, x21, lam),
        0.0,
        3.0,
        0.0,
        lambda x21: x21,
    )
    assert total == pytest.approx(1.0, abs=1e-8)
    assert analytics.distance_joint_pdf(0.5, 0.4, lam) == 0.0


def test_marginal_cdfs_follow_from_joint_pdf():
    lam = 2.0
    for x in (0.2, 0.5, 1.0):
        mass21, _ = integrate.dblquad(
            lambda x11, x21: analytics.distance_joint_pdf(x11, x21, lam),
            0.0,
            x,
            0.0,
            lambda x21: x21,
        )
        assert analytics.x21_marginal_cdf(x, lam) == pytest.approx(mass21, abs=1e-9)
    x = np.linspace(0, 2, 50)
    first = analytics.x11_marginal_cdf(x, lam)
    second = analytics.x21_marginal_cdf(x, lam)
    assert np.all(second <= first)


def test_laplace_at_zero_is_one(macro_net, tin18):
    assert analytics.laplace_interference(0.0, 0.2, macro_net, tin18, 0.4) == 1.0


def test_laplace_arctan_closed_form(macro_net):
    lam = math.pi * macro_net.lambda_b
    for x11 in (0.05, 0.2, 0.7):
        for theta in (0.1, 1.0, 10.0, 100.0):
            s = x11**4 * theta
            sq = math.sqrt(theta)
            expected = math.exp(
                -lam * 0.6 * x11**2 * sq * (math.pi / 2 - math.atan(1 / sq))
            )
            got = analytics.laplace_interference(s, x11, macro_net, CLASSICAL, 0.6)
            assert got == pytest.approx(expected, rel=1e-10)


def test_laplace_is_nonincreasing_in_s(macro_net, tin18):
    values = [
        analytics.laplace_interference(s, 0.1, macro_net, tin18, 0.5)
        for s in np.geomspace(1e-6, 1e6, 40)
    ]
    assert all(0.0 < v <= 1.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_laplace_rejects_bad_arguments(macro_net, tin18):
    with pytest.raises(DomainError):
        analytics.laplace_interference(-1.0, 0.1, macro_net, tin18, 0.5)
    with pytest.raises(DomainError):
        analytics.laplace_interference(1.0, 0.1, macro_net, tin18, 1.5)


@pytest.mark.parametrize("alpha", [3.5, 4.0, 4.5])
def test_laplace_matches_monte_carlo_shot_noise(alpha):
    """E[exp(-sI)] over Rayleigh-faded PPP interferers in an annulus."""
    lam, p_a, ball, outer, s = 1.0, 0.6, 0.6, 12.0, 0.5
    net = NetworkParams.from_beta(lam, 10**15.6, alpha)
    rng = np.random.default_rng(99)
    fields = 20_000
    counts = rng.poisson(lam * p_a * math.pi * (outer**2 - ball**2), fields)
    r2 = ball**2 + rng.uniform(size=counts.sum()) * (outer**2 - ball**2)
    power = rng.exponential(size=counts.sum()) * r2 ** (-alpha / 2)
    interference = np.bincount(
        np.repeat(np.arange(fields), counts), weights=power, minlength=fields
    )
    samples = np.exp(-s * interference)
    half = 2.576 * samples.std(ddof=1) / math.sqrt(fields)

    # The analytic transform integrates to infinity; add back the outer tail.
    scale = s ** (2 / alpha)
    beyond = math.pi * lam * p_a * scale * interference_tail_integral(
        outer**2 / scale, alpha
    )
    expected = analytics.laplace_interference(s, ball, net, CLASSICAL, p_a) * math.exp(
        beyond
    )
    assert abs(samples.mean() - expected) < half


@pytest.mark.parametrize("theta_db", [0.0, 5.0, 10.0])
def test_coverage_reduces_to_classical(macro_net, theta_db):
    theta = 10 ** (theta_db / 10)
    classical = analytics.coverage_classical(theta, macro_net).value
    active = analytics.coverage_active(theta, macro_net, CLASSICAL).value
    effective = analytics.coverage_effective(theta, macro_net, CLASSICAL).value
    assert active == pytest.approx(classical, abs=1e-6)
    assert effective == pytest.approx(classical, abs=1e-6)


def test_interference_limited_coverage_closed_form(noiseless_net):
    expected = 1 / (1 + math.pi / 4)
    assert analytics.coverage_classical(1.0, noiseless_net).value == pytest.approx(
        expected, abs=1e-7
    )
    assert analytics.coverage_active(
        1.0, noiseless_net, CLASSICAL
    ).value == pytest.approx(expected, abs=1e-7)


def test_effective_is_activity_times_conditional(macro_net, tin18):
    p_a = analytics.prob_tin(macro_net, tin18).value
    for theta in (1.0, 10.0, 100.0):
        eff = analytics.coverage_effective(theta, macro_net, tin18).value
        cond = analytics.coverage_active(theta, macro_net, tin18).value
        assert eff == pytest.approx(p_a * cond, rel=1e-12)


def test_coverage_decreases_with_threshold(macro_net, tin18):
    thetas = [10 ** (db / 10) for db in range(-5, 25, 3)]
    for fn in (analytics.coverage_active, analytics.coverage_effective):
        values = [fn(t, macro_net, tin18).value for t in thetas]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    classical = [analytics.coverage_classical(t, macro_net).value for t in thetas]
    assert all(b < a for a, b in zip(classical, classical[1:]))


def test_coverage_effective_vanishes_at_mu_one(macro_net):
    assert analytics.coverage_effective(10.0, macro_net, TinParams(mu=1.0)).value < 1e-6


def test_coverage_rejects_nonpositive_threshold(macro_net, tin18):
    with pytest.raises(DomainError):
        analytics.coverage_effective(0.0, macro_net, tin18)
    with pytest.raises(DomainError):
        analytics.coverage_classical(-1.0, macro_net)


def test_rate_reduces_to_classical(macro_net):
    classical = analytics.rate_classical(macro_net).value
    assert analytics.rate_effective(macro_net, CLASSICAL).value == pytest.approx(
        classical, abs=1e-5
    )
    assert analytics.rate_active(macro_net, CLASSICAL).value == pytest.approx(
        classical, abs=1e-5
    )


def test_rate_classical_is_scale_free_without_noise():
    values = [
        analytics.rate_classical(NetworkParams.from_beta(lam, 1e30, 4.0)).value
        for lam in (1.0, 5.0, 10.0)
    ]
    assert max(values) - min(values) < 1e-4
    assert 1.0 < values[0] < 2.0


def test_rate_effective_is_activity_times_conditional(macro_net, tin18):
    p_a = analytics.prob_tin(macro_net, tin18).value
    eff = analytics.rate_effective(macro_net, tin18).value
    cond = analytics.rate_active(macro_net, tin18).value
    assert eff == pytest.approx(p_a * cond, rel=1e-12)


@pytest.mark.slow
def test_tin_improves_the_effective_rate(macro_net):
    classical = analytics.rate_classical(macro_net).value
    tin = analytics.rate_effective(macro_net, TinParams(mu=1.9)).value
    assert 0.0 < (tin - classical) / classical < 0.25
