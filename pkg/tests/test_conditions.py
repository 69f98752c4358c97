import math

import numpy as np
import pytest

from tincell.models.network import DistanceTriple, NetworkParams, TinParams
from tincell.services.conditions import (
    beta_from_dbm,
    exact_log_margin,
    inhomogeneity_radius,
    inhomogeneity_radius_array,
    tin_exact_mask,
    tin_exact_predicate,
    tin_radius_kink,
    tin_simplified_mask,
    tin_simplified_predicate,
)

CLASSICAL = TinParams(m_factor=1.0, mu=2.0)


@pytest.fixture
def random_triples():
    rng = np.random.default_rng(2024)
    x11 = rng.uniform(0.05, 2.0, 20_000)
    x12 = rng.uniform(0.05, 2.0, 20_000)
    x21 = x11 + rng.uniform(0.0, 2.0, 20_000)
    return x11, x12, x21


def test_beta_from_dbm():
    assert beta_from_dbm(46, -110) == pytest.approx(10**15.6, rel=1e-12)
    assert beta_from_dbm(0, 0) == 1.0
    assert beta_from_dbm(30, 0) == pytest.approx(1000.0)


def test_radius_collapses_to_x11_without_tin(macro_net):
    for x in (0.01, 0.3, 2.0):
        assert inhomogeneity_radius(x, macro_net, CLASSICAL) == pytest.approx(x)


def test_radius_tin_branch(macro_net):
    tin = TinParams(m_factor=1.0, mu=1.0)
    radius = inhomogeneity_radius(1.0, macro_net, tin)
    assert radius == pytest.approx(10**1.95, rel=1e-10)


def test_radius_relaxed_by_m(macro_net):
    tin = TinParams(m_factor=16.0, mu=2.0)
    assert inhomogeneity_radius(2.0, macro_net, tin) == 2.0


def test_radius_never_below_x11(macro_net):
    x = np.geomspace(1e-4, 1e6, 200)
    for mu in (1.0, 1.4, 1.8, 2.0):
        for m in (1.0, 10.0):
            tin = TinParams(m_factor=m, mu=mu)
            radius = inhomogeneity_radius_array(x, macro_net, tin)
            assert np.all(radius >= x)


def test_kink_separates_branches(macro_net, tin18):
    kink = tin_radius_kink(macro_net, tin18)
    assert kink == pytest.approx(10 ** (15.6 / 4), rel=1e-10)
    assert inhomogeneity_radius(kink * 1.01, macro_net, tin18) == pytest.approx(
        kink * 1.01
    )
    assert inhomogeneity_radius(kink * 0.99, macro_net, tin18) > kink * 0.99


def test_exact_predicate_examples(macro_net):
    assert tin_exact_predicate(
        DistanceTriple(x11=1, x12=2, x21=1), macro_net, CLASSICAL
    )
    assert not tin_exact_predicate(
        DistanceTriple(x11=1, x12=0.25, x21=1), macro_net, CLASSICAL
    )


def test_simplified_predicate_examples(macro_net):
    assert tin_simplified_predicate(1.0, 1.5, macro_net, CLASSICAL)
    assert not tin_simplified_predicate(1.0, 0.5, macro_net, CLASSICAL)


def test_exact_matches_linear_snr_form(macro_net, tin18, random_triples):
    x11, x12, x21 = random_triples
    beta, alpha = macro_net.beta, macro_net.alpha
    linear = tin18.m_factor * (beta * x11**-alpha) ** tin18.mu >= beta**2 * (
        x12 * x21
    ) ** (-alpha)
    margin = exact_log_margin(x11, x12, x21, macro_net, tin18)
    clear = np.abs(margin) > 1e-9
    exact = tin_exact_mask(x11, x12, x21, macro_net, tin18)
    assert np.array_equal(linear[clear], exact[clear])


def test_simplified_is_exact_with_x12_set_to_x21(macro_net, tin18, random_triples):
    x11, _, x21 = random_triples
    assert np.array_equal(
        tin_simplified_mask(x11, x21, macro_net, tin18),
        tin_exact_mask(x11, x21, x21, macro_net, tin18),
    )


def test_relaxation_factor_only_relaxes(macro_net, random_triples):
    x11, x12, x21 = random_triples
    for mu in (1.2, 1.8):
        strict = tin_exact_mask(x11, x12, x21, macro_net, TinParams(m_factor=1, mu=mu))
        relaxed = tin_exact_mask(x11, x12, x21, macro_net, TinParams(m_factor=5, mu=mu))
        assert np.all(relaxed[strict])


def test_classical_condition_ignores_beta(random_triples):
    x11, x12, x21 = random_triples
    low = NetworkParams.from_beta(1.0, 10.0, 4.0)
    high = NetworkParams.from_beta(1.0, 1e20, 4.0)
    assert np.array_equal(
        tin_exact_mask(x11, x12, x21, low, CLASSICAL),
        tin_exact_mask(x11, x12, x21, high, CLASSICAL),
    )
    assert np.all(tin_simplified_mask(x11, x21, high, CLASSICAL))


def test_boundary_counts_as_active(macro_net):
    # x11^2 == x12 * x21 at mu = 2, M = 1
    assert tin_exact_predicate(
        DistanceTriple(x11=2.0, x12=2.0, x21=2.0), macro_net, CLASSICAL
    )
    assert math.isclose(
        float(exact_log_margin(2.0, 2.0, 2.0, macro_net, CLASSICAL)), 0.0, abs_tol=1e-12
    )
