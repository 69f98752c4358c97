"""High-SNR approximations for alpha = 4 and the optimal-mu equation.

For alpha = 4 the Laplace tail integral reduces to an arctangent, the
noise term can be dropped at large beta, and the effective coverage turns
into a power series in sqrt(R) = A1 / A2^(mu/2). Everything here except
``coverage_highsnr_split`` and ``argmax_mu_exact`` is specific to
alpha = 4 and M = 1.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from tincell.errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    UnsupportedRegimeError,
)
from tincell.models.config import QuadratureConfig
from tincell.models.network import NetworkParams, TinParams
from tincell.models.results import ApproxResult, OptimalMu, SeriesCoefficients
from tincell.services import analytics
from tincell.services.conditions import tin_radius_kink
from tincell.services.numerics import (
    DEFAULT_QUADRATURE,
    TRUNCATION_EXPONENT,
    find_root_bracketed,
    integrate_finite,
    log_gamma_fn,
    sum_alternating_series,
)

logger = logging.getLogger(__name__)

# A series whose largest term exceeds the sum by this factor has lost too
# many digits to cancellation and is evaluated through its integral instead.
MAX_CANCELLATION = 1e6

MU_BOUNDS = (1.0, 2.0)


class OptimalityTerms(NamedTuple):
    """Natural logs of both sides of the optimal-mu equation."""

    log_minuend: float
    log_subtrahend: float

    @property
    def residual(self) -> float:
        return self.log_minuend - self.log_subtrahend


class HighSnrSplit(NamedTuple):
    """Effective coverage split at the inhomogeneity kink."""

    near: float
    far: float

    @property
    def total(self) -> float:
        return self.near + self.far


class GridMaximum(NamedTuple):
    mu: float
    value: float


def _require_alpha4(net: NetworkParams) -> None:
    if net.alpha != 4.0:
        raise UnsupportedRegimeError(
            f"high-SNR formulas need alpha = 4, got {net.alpha}; "
            "use the analytics module for general alpha"
        )


def _require_unit_m(tin: TinParams) -> None:
    if tin.m_factor != 1.0:
        raise UnsupportedRegimeError(
            f"high-SNR formulas need M = 1, got M = {tin.m_factor}"
        )


def _closed_form(net: NetworkParams, mu: float) -> ApproxResult:
    """2 Gamma(2/mu) / (mu (pi lambda_b)^(2/mu - 1) beta^(1/mu - 1/2))"""
    log_value = (
        math.log(2.0)
        + log_gamma_fn(2.0 / mu)
        - math.log(mu)
        - (2.0 / mu - 1.0) * math.log(math.pi * net.lambda_b)
        - (1.0 / mu - 0.5) * net.log_beta
    )
    if log_value > 0.0:
        logger.warning(
            "high-SNR closed form is %.4g > 1 at mu=%s; clamped",
            math.exp(log_value),
            mu,
        )
        return ApproxResult(value=1.0, flags=("clamped",))
    return ApproxResult(value=math.exp(log_value))


def prob_tin_highsnr(net: NetworkParams, tin: TinParams) -> ApproxResult:
    """High-SNR closed form of the probability of TIN.

    Raises:
        UnsupportedRegimeError: If alpha != 4 or M != 1
    """
    _require_alpha4(net)
    _require_unit_m(tin)
    return _closed_form(net, tin.mu)


def cnet_small_theta(net: NetworkParams, tin: TinParams) -> ApproxResult:
    """Effective coverage as theta -> 0 at high SNR.

    Shares its closed form with ``prob_tin_highsnr``: for vanishing
    thresholds an active UE is always covered.

    Raises:
        UnsupportedRegimeError: If alpha != 4 or M != 1
    """
    _require_alpha4(net)
    _require_unit_m(tin)
    return _closed_form(net, tin.mu)


def series_coefficients(
    theta: float, net: NetworkParams, tin: TinParams
) -> SeriesCoefficients:
    """A1, A2 and R = A1^2 / A2^mu, with the closed-form P[A_UE] inside A2."""
    _require_alpha4(net)
    _require_unit_m(tin)
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    p_a = prob_tin_highsnr(net, tin).value
    log_a1 = math.log(math.pi * net.lambda_b) + (2.0 - tin.mu) / 4.0 * net.log_beta
    log_a2 = math.log(math.pi**2 * net.lambda_b * p_a * math.sqrt(theta) / 2.0)
    return SeriesCoefficients(
        a1=math.exp(log_a1),
        a2=math.exp(log_a2),
        r=math.exp(2.0 * log_a1 - tin.mu * log_a2),
    )


def r_statistic(theta: float, net: NetworkParams, tin: TinParams) -> float:
    """R = A1^2 / A2^mu; the coverage-optimal mu sits near R = 1."""
    return series_coefficients(theta, net, tin).r


def _resummed(sqrt_r: float, mu: float, cfg: QuadratureConfig) -> float:
    """int_0^inf exp(-t - sqrt(R) t^(mu/2)) dt, the integral the series expands."""
    upper = min(TRUNCATION_EXPONENT, (TRUNCATION_EXPONENT / sqrt_r) ** (2.0 / mu))
    return integrate_finite(
        lambda t: math.exp(-t - sqrt_r * t ** (mu / 2.0)), 0.0, upper, cfg
    ).value


def _terms_needed(sqrt_r: float, mu: float) -> int:
    """Term budget; a geometric series at mu = 2 needs more as sqrt(R) -> 1."""
    if mu < 2.0 or sqrt_r == 0.0:
        return 400
    return min(1_000_000, max(400, math.ceil(-40.0 / math.log(sqrt_r)) + 10))


def coverage_series(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ApproxResult:
    """High-SNR effective coverage as the alternating series

        (pi lambda_b / A2) sum_n (-1)^n R^(n/2) Gamma((n mu + 2)/2) / n!

    For mu < 2 and large R the terms grow to astronomically large values
    before the factorial wins. The sum is then evaluated through the
    integral it expands, and the result carries the ``resummed`` flag.

    Raises:
        DivergenceError: At mu = 2 with sqrt(R) >= 1, where the series is
            geometric with ratio >= 1
        UnsupportedRegimeError: If alpha != 4 or M != 1
    """
    coeffs = series_coefficients(theta, net, tin)
    sqrt_r = math.sqrt(coeffs.r)
    prefactor = math.pi * net.lambda_b / coeffs.a2
    half_log_r = 0.5 * math.log(coeffs.r)
    mu = tin.mu

    def log_term(n: int) -> float:
        return (
            n * half_log_r
            + log_gamma_fn((n * mu + 2.0) / 2.0)
            - log_gamma_fn(n + 1.0)
        )

    if tin.is_inactive and sqrt_r >= 1.0:
        raise DivergenceError(
            f"series diverges at mu=2 with sqrt(R)={sqrt_r:.4g} >= 1",
            best_estimate=math.pi * net.lambda_b / (coeffs.a1 + coeffs.a2),
            error_bound=math.inf,
        )

    flags: tuple[str, ...] = ()
    try:
        summed = sum_alternating_series(log_term, n_max=_terms_needed(sqrt_r, mu))
        if summed.cancellation > MAX_CANCELLATION:
            raise ConvergenceError(
                f"cancellation factor {summed.cancellation:.3g}",
                best_estimate=summed.value,
                error_bound=summed.max_term * np.finfo(float).eps,
            )
        total = summed.value
    except ConvergenceError as exc:
        if tin.is_inactive:
            raise
        logger.debug("series for mu=%s resummed by quadrature: %s", mu, exc)
        total = _resummed(sqrt_r, mu, cfg)
        flags = ("resummed",)

    value = prefactor * total
    if value > 1.0:
        return ApproxResult(value=1.0, flags=flags + ("clamped",))
    return ApproxResult(value=max(value, 0.0), flags=flags)


def coverage_highsnr_integral(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ApproxResult:
    """High-SNR effective coverage before the series expansion.

    2 pi lambda_b int_0^{beta^(1/4)} x exp(-A1 x^mu - A2 x^2 (2/pi) T(x)) dx

    with T(x) = pi/2 - arctan(x^(mu-2) beta^((2-mu)/4) / sqrt(theta))

    Raises:
        ConvergenceError: If the quadrature does not converge
        UnsupportedRegimeError: If alpha != 4 or M != 1
    """
    _require_alpha4(net)
    _require_unit_m(tin)
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    lam = math.pi * net.lambda_b
    mu = tin.mu
    p_a = prob_tin_highsnr(net, tin).value
    log_shift = (2.0 - mu) / 4.0 * net.log_beta
    a1 = lam * math.exp(log_shift)
    sqrt_theta = math.sqrt(theta)
    log_sqrt_theta = math.log(sqrt_theta)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        log_arg = (mu - 2.0) * math.log(x) + log_shift - log_sqrt_theta
        tail = math.pi / 2.0 - math.atan(math.exp(min(log_arg, 700.0)))
        exponent = -a1 * x**mu - lam * p_a * x * x * sqrt_theta * tail
        return 2.0 * lam * x * math.exp(exponent)

    upper = min(math.exp(net.log_beta / 4.0), (TRUNCATION_EXPONENT / a1) ** (1.0 / mu))
    q = integrate_finite(integrand, 0.0, upper, cfg)
    if q.value > 1.0:
        return ApproxResult(value=1.0, flags=("clamped",))
    return ApproxResult(value=max(q.value, 0.0))


def optimality_terms(mu: float, theta: float, net: NetworkParams) -> OptimalityTerms:
    """Logs of both sides of the optimal-mu equation

        mu^mu (pi lambda_b)^4 beta^(2-mu) = (pi^3 lambda_b^2 sqrt(theta) Gamma(2/mu))^mu

    Their difference equals ln R, so the root is exactly where R = 1.
    """
    _require_alpha4(net)
    if not MU_BOUNDS[0] <= mu <= MU_BOUNDS[1]:
        raise DomainError(f"mu must lie in [1, 2], got {mu!r}")
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    log_minuend = (
        mu * math.log(mu)
        + 4.0 * math.log(math.pi * net.lambda_b)
        + (2.0 - mu) * net.log_beta
    )
    log_subtrahend = mu * (
        3.0 * math.log(math.pi)
        + 2.0 * math.log(net.lambda_b)
        + 0.5 * math.log(theta)
        + log_gamma_fn(2.0 / mu)
    )
    return OptimalityTerms(log_minuend, log_subtrahend)


def solve_optimal_mu(theta: float, net: NetworkParams) -> OptimalMu:
    """Coverage-maximizing mu in [1, 2] for M = 1.

    Returns the boundary mu = 2 flagged ``tin-inactive-optimal`` when the
    residual stays positive on [1, 2] (small thresholds, no TIN needed),
    and mu = 1 flagged ``tin-maximal`` when it stays negative.

    Raises:
        DomainError: If the residual is not finite on the bracket
        UnsupportedRegimeError: If alpha != 4
    """

    def residual(mu: float) -> float:
        return optimality_terms(mu, theta, net).residual

    found = find_root_bracketed(residual, *MU_BOUNDS)
    if found.bracketed:
        return OptimalMu(mu=found.root, interior=True)
    if residual(MU_BOUNDS[1]) > 0.0:
        logger.info("no root on [1, 2] at theta=%s; TIN not needed", theta)
        return OptimalMu(mu=MU_BOUNDS[1], interior=False, flag="tin-inactive-optimal")
    return OptimalMu(mu=MU_BOUNDS[0], interior=False, flag="tin-maximal")


def coverage_highsnr_split(
    theta: float,
    net: NetworkParams,
    tin: TinParams,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> HighSnrSplit:
    """Exact effective coverage split at the kink of the inhomogeneity radius.

    The near part covers x11 below the kink, where the radius follows the
    TIN branch; the far part is where the radius equals x11. At high SNR
    the kink moves out to beta^(1/alpha) and the far part vanishes.
    Works for any alpha.
    """
    p_a = analytics.prob_tin(net, tin, cfg).value
    integrand = analytics.coverage_integrand(theta, net, tin, p_a, cfg)
    kink = tin_radius_kink(net, tin)
    cutoff = analytics.x11_cutoff(net, tin)
    near = integrate_finite(integrand, 0.0, min(kink, cutoff), cfg).value
    far = integrate_finite(integrand, kink, cutoff, cfg).value
    return HighSnrSplit(near=near, far=far)


def argmax_mu_exact(
    theta: float,
    net: NetworkParams,
    step: float = 1e-3,
    m_factor: float = 1.0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> GridMaximum:
    """Grid maximizer of the exact effective coverage over mu in [1, 2]."""
    if not 0 < step <= 1:
        raise DomainError(f"step must lie in (0, 1], got {step!r}")
    grid = np.linspace(*MU_BOUNDS, int(round(1.0 / step)) + 1)
    values = np.array(
        [
            analytics.coverage_effective(
                theta, net, TinParams(m_factor=m_factor, mu=float(mu)), cfg=cfg
            ).value
            for mu in grid
        ]
    )
    best = int(np.argmax(values))
    return GridMaximum(mu=float(grid[best]), value=float(values[best]))
