"""Analytical coverage and rate of TIN-scheduled cellular networks.

The typical UE sits at the origin of a Crofton cell. Active interferers
form an inhomogeneous PPP of density lambda_b * P[A_UE] outside the
inhomogeneity ball and zero inside. The Gauss hypergeometric form of the
interference Laplace transform is never evaluated; the equivalent tail
integral J(v, alpha) from ``numerics`` is used instead.
"""

import logging
import math
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from tincell.errors import DegenerateConditioningError, DomainError
from tincell.models.config import QuadratureConfig
from tincell.models.network import NetworkParams, TinParams
from tincell.models.results import AnalyticResult
from tincell.services.conditions import inhomogeneity_radius, tin_radius_kink
from tincell.services.numerics import (
    DEFAULT_QUADRATURE,
    TRUNCATION_EXPONENT,
    Quadrature,
    find_root_bracketed,
    integrate_finite,
    interference_tail_integral,
)

logger = logging.getLogger(__name__)

# Conditional quantities are undefined below this activity probability.
MIN_ACTIVE_PROBABILITY = 1e-12

# Inner rate integrand is cut once it drops below 1e-12 of its value at tau = 0.
TAU_FLOOR = math.log(1e-12)
TAU_CEILING = 40.0

CLASSICAL = TinParams(m_factor=1.0, mu=2.0)


def x11_cutoff(net: NetworkParams, tin: TinParams) -> float:
    """x11 at which exp(-pi lambda_b R_I(x11)^2) has fallen to e^-45."""
    r_star = math.sqrt(TRUNCATION_EXPONENT / (math.pi * net.lambda_b))
    if tin.mu == 2.0:
        return r_star
    log_c = (2.0 - tin.mu) / (2.0 * net.alpha) * net.log_beta - math.log(
        tin.m_factor
    ) / (2.0 * net.alpha)
    tin_branch = math.exp((math.log(r_star) - log_c) * 2.0 / tin.mu)
    return min(r_star, tin_branch)


def _require_active(p_a: float) -> None:
    if p_a < MIN_ACTIVE_PROBABILITY:
        raise DegenerateConditioningError(
            f"P[A_UE]={p_a:.3g} is below {MIN_ACTIVE_PROBABILITY}; "
            "conditional metrics are undefined"
        )


def _resolve_p_a(
    net: NetworkParams, tin: TinParams, p_a: float | None, cfg: QuadratureConfig
) -> float:
    return prob_tin(net, tin, cfg).value if p_a is None else p_a


def distance_joint_pdf(x11: ArrayLike, x21: ArrayLike, lambda_b: float) -> np.ndarray:
    """Crofton-cell joint density of (X11, X21); zero unless x11 < x21."""
    x11 = np.asarray(x11, dtype=float)
    x21 = np.asarray(x21, dtype=float)
    lam = np.pi * lambda_b
    density = 4.0 * lam**2 * x11 * x21 * np.exp(-lam * x21**2)
    return np.where(x11 < x21, density, 0.0)


def x11_marginal_cdf(x: ArrayLike, lambda_b: float) -> np.ndarray:
    """CDF of the nearest-BS distance, 1 - exp(-pi lambda_b x^2)."""
    x = np.asarray(x, dtype=float)
    return -np.expm1(-np.pi * lambda_b * x**2)


def x21_marginal_cdf(x: ArrayLike, lambda_b: float) -> np.ndarray:
    """CDF of the second-nearest-BS distance."""
    u = np.pi * lambda_b * np.asarray(x, dtype=float) ** 2
    return 1.0 - np.exp(-u) * (1.0 + u)


@lru_cache(maxsize=512)
def prob_tin(
    net: NetworkParams, tin: TinParams, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> AnalyticResult:
    """Probability that the typical UE passes the simplified TIN condition.

    P[A_UE] = int 2 (pi lambda_b)^2 x exp(-pi lambda_b x^2)
              min^2(x, M^(1/(alpha mu)) beta^(-(2-mu)/(alpha mu)) x^(2/mu)) dx

    Returns exactly 1 when mu == 2, since the condition is then implied by
    nearest-BS association for every M >= 1.
    """
    if tin.is_inactive:
        return AnalyticResult(value=1.0, est_error=0.0)

    lam = math.pi * net.lambda_b
    log_scale = (
        math.log(tin.m_factor) - (2.0 - tin.mu) * net.log_beta
    ) / (net.alpha * tin.mu)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        bound = min(x, math.exp(log_scale + 2.0 / tin.mu * math.log(x)))
        return 2.0 * lam**2 * x * math.exp(-lam * x * x) * bound * bound

    upper = math.sqrt(TRUNCATION_EXPONENT / lam)
    q = integrate_finite(
        integrand, 0.0, upper, cfg, breakpoints=(tin_radius_kink(net, tin),)
    )
    return AnalyticResult(value=min(max(q.value, 0.0), 1.0), est_error=q.error)


def conditional_pdf_x11(
    x11: ArrayLike, net: NetworkParams, tin: TinParams, p_a: float
) -> np.ndarray | float:
    """Density of X11 given that the typical UE is active.

    Raises:
        DegenerateConditioningError: If ``p_a`` is numerically zero
    """
    _require_active(p_a)
    x = np.asarray(x11, dtype=float)
    lam = math.pi * net.lambda_b
    radius = np.array([inhomogeneity_radius(v, net, tin) for v in np.atleast_1d(x)])
    density = 2.0 * lam * np.atleast_1d(x) * np.exp(-lam * radius**2) / p_a
    return float(density[0]) if x.ndim == 0 else density


def interferer_density(
    r: float, x11: float, net: NetworkParams, tin: TinParams, p_a: float
) -> float:
    """Density of the approximating inhomogeneous PPP of active interferers."""
    if r < inhomogeneity_radius(x11, net, tin):
        return 0.0
    return net.lambda_b * p_a


def _log_laplace(
    s: float, radius: float, net: NetworkParams, p_a: float, cfg: QuadratureConfig
) -> float:
    """log L_I(s) for an interferer-free ball of the given radius."""
    if s == 0.0 or p_a == 0.0:
        return 0.0
    log_s = math.log(s)
    v = math.exp(-2.0 / net.alpha * log_s + 2.0 * math.log(radius))
    j = interference_tail_integral(v, net.alpha, cfg)
    return -math.pi * net.lambda_b * p_a * math.exp(2.0 / net.alpha * log_s) * j


def laplace_interference(
    s: float,
    x11: float,
    net: NetworkParams,
    tin: TinParams,
    p_a: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Laplace transform of the interference at the typical UE.

    exp(-pi lambda_b p_a s^(2/alpha) J(s^(-2/alpha) R_I(x11)^2, alpha))

    Raises:
        DomainError: If ``s < 0`` or ``p_a`` is outside [0, 1]
    """
    if not s >= 0:
        raise DomainError(f"s must be nonnegative, got {s!r}")
    if not 0.0 <= p_a <= 1.0:
        raise DomainError(f"p_a must be a probability, got {p_a!r}")
    radius = inhomogeneity_radius(x11, net, tin)
    return math.exp(_log_laplace(s, radius, net, p_a, cfg))


def coverage_integrand(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    p_a: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> Callable[[float], float]:
    """x11-integrand of the effective coverage.

    2 pi lambda_b x e^{-pi lambda_b R_I(x)^2} e^{-x^alpha theta/beta} L_I(x^alpha theta)
    """
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    lam = math.pi * net.lambda_b
    log_theta = math.log(theta)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        radius = inhomogeneity_radius(x, net, tin)
        log_s = net.alpha * math.log(x) + log_theta
        exponent = (
            -lam * radius * radius
            - math.exp(log_s - net.log_beta)
            + _log_laplace(math.exp(log_s), radius, net, p_a, cfg)
        )
        return 2.0 * lam * x * math.exp(exponent)

    return integrand


def _coverage_integral(
    theta: float, net: NetworkParams, tin: TinParams, p_a: float, cfg: QuadratureConfig
) -> Quadrature:
    return integrate_finite(
        coverage_integrand(theta, net, tin, p_a, cfg),
        0.0,
        x11_cutoff(net, tin),
        cfg,
        breakpoints=(tin_radius_kink(net, tin),),
    )


def coverage_effective(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    p_a: float | None = None,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> AnalyticResult:
    """Effective SINR coverage, P[A_UE] times the coverage of an active UE."""
    p = _resolve_p_a(net, tin, p_a, cfg)
    q = _coverage_integral(theta, net, tin, p, cfg)
    return AnalyticResult(value=min(max(q.value, 0.0), 1.0), est_error=q.error)


def coverage_active(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    p_a: float | None = None,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> AnalyticResult:
    """SINR coverage probability of the typical active UE.

    Raises:
        DegenerateConditioningError: If P[A_UE] is numerically zero
    """
    p = _resolve_p_a(net, tin, p_a, cfg)
    _require_active(p)
    q = _coverage_integral(theta, net, tin, p, cfg)
    return AnalyticResult(value=min(max(q.value / p, 0.0), 1.0), est_error=q.error / p)


def coverage_classical(
    theta: float, net: NetworkParams, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> AnalyticResult:
    """SINR coverage of a conventional network where every BS transmits."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    lam = math.pi * net.lambda_b
    tail = interference_tail_integral(theta ** (-2.0 / net.alpha), net.alpha, cfg)
    spread = lam * (1.0 + theta ** (2.0 / net.alpha) * tail)
    log_noise = math.log(theta) - net.log_beta

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        noise = math.exp(net.alpha * math.log(x) + log_noise)
        return 2.0 * lam * x * math.exp(-spread * x * x - noise)

    upper = math.sqrt(TRUNCATION_EXPONENT / lam)
    q = integrate_finite(integrand, 0.0, upper, cfg)
    return AnalyticResult(value=min(max(q.value, 0.0), 1.0), est_error=q.error)


def _tau_limit(log_integrand) -> float:
    """Point where a decreasing log-integrand (0 at tau = 0) reaches TAU_FLOOR."""
    shifted = lambda tau: log_integrand(tau) - TAU_FLOOR  # noqa: E731
    found = find_root_bracketed(shifted, 0.0, TAU_CEILING, tol=1e-6)
    return found.root if found.bracketed else TAU_CEILING


def _rate_integral(
    net: NetworkParams, tin: TinParams, p_a: float, cfg: QuadratureConfig
) -> Quadrature:
    lam = math.pi * net.lambda_b
    inner_error = 0.0

    def inner(x: float, radius: float) -> float:
        nonlocal inner_error
        log_x_alpha = net.alpha * math.log(x)

        def log_integrand(tau: float) -> float:
            if tau <= 0.0:
                return 0.0
            log_s = log_x_alpha + math.log(math.expm1(tau))
            return -math.exp(log_s - net.log_beta) + _log_laplace(
                math.exp(log_s), radius, net, p_a, cfg
            )

        upper = _tau_limit(log_integrand)
        q = integrate_finite(lambda t: math.exp(log_integrand(t)), 0.0, upper, cfg)
        inner_error = max(inner_error, q.error)
        return q.value

    def outer(x: float) -> float:
        if x <= 0.0:
            return 0.0
        radius = inhomogeneity_radius(x, net, tin)
        return 2.0 * lam * x * math.exp(-lam * radius * radius) * inner(x, radius)

    q = integrate_finite(
        outer, 0.0, x11_cutoff(net, tin), cfg, breakpoints=(tin_radius_kink(net, tin),)
    )
    return Quadrature(q.value, q.error + inner_error)


def rate_effective(
    net: NetworkParams,
    tin: TinParams,
    p_a: float | None = None,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> AnalyticResult:
    """Effective average rate in nats/sec/Hz, P[A_UE] times the active-UE rate."""
    p = _resolve_p_a(net, tin, p_a, cfg)
    q = _rate_integral(net, tin, p, cfg)
    return AnalyticResult(value=max(q.value, 0.0), est_error=q.error)


def rate_active(
    net: NetworkParams,
    tin: TinParams,
    p_a: float | None = None,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> AnalyticResult:
    """Average rate E[ln(1 + SINR)] of the typical active UE, nats/sec/Hz.

    Outer quadrature over x11, inner over tau; the inner range is cut where
    the integrand falls below 1e-12 of its peak, and never beyond tau = 40.

    Raises:
        DegenerateConditioningError: If P[A_UE] is numerically zero
    """
    p = _resolve_p_a(net, tin, p_a, cfg)
    _require_active(p)
    q = _rate_integral(net, tin, p, cfg)
    return AnalyticResult(value=max(q.value / p, 0.0), est_error=q.error / p)


def rate_classical(
    net: NetworkParams, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> AnalyticResult:
    """Average rate of a conventional network, nats/sec/Hz.

    Integrates the classical coverage over thresholds e^tau - 1, which is
    the same double integral with the x11 integral taken first.
    """

    def coverage_at(tau: float) -> float:
        if tau <= 0.0:
            return 1.0
        return coverage_classical(math.expm1(tau), net, cfg).value

    def log_coverage(tau: float) -> float:
        return math.log(max(coverage_at(tau), 1e-300))

    upper = _tau_limit(log_coverage)
    q = integrate_finite(coverage_at, 0.0, upper, cfg)
    return AnalyticResult(value=max(q.value, 0.0), est_error=q.error)
