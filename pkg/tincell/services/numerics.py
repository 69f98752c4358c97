"""Special functions, quadrature, series summation and root finding.

Everything here is a pure function of its arguments.
"""

import logging
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from tincell.errors import ConvergenceError, DivergenceError, DomainError
from tincell.models.config import QuadratureConfig
from tincell.models.results import BracketResult

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE = QuadratureConfig()

# Integrands are cut where the dominating exponential falls below e^-45.
TRUNCATION_EXPONENT = 45.0


class Quadrature(NamedTuple):
    value: float
    error: float


class SeriesSum(NamedTuple):
    value: float
    terms: int
    max_term: float

    @property
    def cancellation(self) -> float:
        """Ratio of the largest term to the result; ~1/eps means no digits left."""
        if self.value == 0.0:
            return math.inf
        return self.max_term / abs(self.value)


def _require_positive_finite(x: float, name: str) -> None:
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive and finite, got {x!r}")


def gamma_fn(x: float) -> float:
    """Gamma function for positive arguments.

    Raises:
        DomainError: If ``x`` is not positive and finite
    """
    _require_positive_finite(x, "x")
    return float(special.gamma(x))


def log_gamma_fn(x: float) -> float:
    """Natural log of the Gamma function, for overflow-safe series terms."""
    _require_positive_finite(x, "x")
    return float(special.gammaln(x))


def _quad(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    cfg: QuadratureConfig,
    **kwargs,
) -> Quadrature:
    out = integrate.quad(
        f,
        lower,
        upper,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
        **kwargs,
    )
    value, error = float(out[0]), float(out[1])
    if len(out) > 3:
        target = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        if not math.isfinite(value) or error > target:
            raise ConvergenceError(
                f"quadrature on [{lower}, {upper}] did not converge: {out[3]}",
                best_estimate=value,
                error_bound=error,
            )
        logger.debug(
            "quad warning ignored, error %.3g within target: %s", error, out[3]
        )
    return Quadrature(value, error)


def integrate_finite(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    breakpoints: tuple[float, ...] = (),
) -> Quadrature:
    """Adaptive Gauss-Kronrod quadrature on a finite interval.

    Args:
        f: Integrand
        lower: Lower limit
        upper: Upper limit
        cfg: Tolerances
        breakpoints: Interior points where the integrand has kinks

    Returns:
        Quadrature(value, error)

    Raises:
        ConvergenceError: If the subdivision budget runs out
    """
    if upper <= lower:
        return Quadrature(0.0, 0.0)
    points = sorted(p for p in breakpoints if lower < p < upper)
    if points:
        return _quad(f, lower, upper, cfg, points=points)
    return _quad(f, lower, upper, cfg)


def integrate_semi_infinite(
    f: Callable[[float], float],
    lower: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> Quadrature:
    """Integrate ``f`` over ``[lower, inf)``.

    QUADPACK maps the half line onto (0, 1] with x = lower + (1 - t)/t and
    refines with a 15-point Gauss-Kronrod rule.

    Raises:
        ConvergenceError: If the subdivision budget runs out; carries the
            best estimate and its error bound
    """
    return _quad(f, lower, np.inf, cfg)


def exp_cutoff(rate: float, power: float) -> float:
    """Point x where exp(-rate * x**power) has fallen to e^-45."""
    return (TRUNCATION_EXPONENT / rate) ** (1.0 / power)


def interference_tail_integral(
    v: float, alpha: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """J(v, alpha) = integral of 1 / (1 + z^(alpha/2)) over [v, inf).

    For alpha = 4 the closed form pi/2 - arctan(v) is used. Otherwise the
    integral is evaluated on a finite interval: for v <= 1 as the complete
    integral (pi/a)/sin(pi/a) minus the smooth part on [0, v]; for v > 1
    through z = 1/u, which leaves u^(a-2)/(1 + u^a) on [0, 1/v] with the
    algebraic endpoint weight handled by QUADPACK.

    Raises:
        DomainError: If ``alpha <= 2`` or ``v < 0``
    """
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2 for a finite integral, got {alpha!r}")
    if not v >= 0:
        raise DomainError(f"v must be nonnegative, got {v!r}")
    if alpha == 4.0:
        return math.pi / 2 - math.atan(v)

    a = alpha / 2
    if v <= 1.0:
        complete = (math.pi / a) / math.sin(math.pi / a)
        if v == 0.0:
            return complete
        head = _quad(lambda z: 1.0 / (1.0 + z**a), 0.0, v, cfg)
        return complete - head.value
    tail = _quad(
        lambda u: 1.0 / (1.0 + u**a),
        0.0,
        1.0 / v,
        cfg,
        weight="alg",
        wvar=(a - 2.0, 0.0),
    )
    return tail.value


def find_root_bracketed(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> BracketResult:
    """Find a sign change of ``f`` on ``[lo, hi]`` with Brent's method.

    Returns:
        BracketResult with the root, or with the endpoint that minimizes
        |f| when both endpoints have the same sign

    Raises:
        DomainError: If ``lo >= hi`` or ``f`` is not finite at an endpoint
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    f_lo, f_hi = float(f(lo)), float(f(hi))
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise DomainError(f"f is not finite at the bracket: f(lo)={f_lo}, f(hi)={f_hi}")
    if f_lo == 0.0:
        return BracketResult(root=lo, bracketed=True)
    if f_hi == 0.0:
        return BracketResult(root=hi, bracketed=True)
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        best = lo if abs(f_lo) <= abs(f_hi) else hi
        return BracketResult(bracketed=False, best_endpoint=best)
    root = optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    return BracketResult(root=float(root), bracketed=True)


def sum_alternating_series(
    log_term: Callable[[int], float], tol: float = 1e-15, n_max: int = 400
) -> SeriesSum:
    """Sum the series  sum_n (-1)^n exp(log_term(n))  from n = 0.

    Terms are supplied as log-magnitudes so that factorials and powers never
    overflow on their own. Summation stops once the next term is below
    ``tol * |partial sum|``.

    Raises:
        DivergenceError: If a term overflows, or terms are still growing
            when ``n_max`` is reached
        ConvergenceError: If ``n_max`` terms were summed without meeting
            ``tol``
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    partial = 0.0
    max_term = 0.0
    growing = 0
    log_t = log_term(0)
    for n in range(n_max):
        term = math.exp(log_t) if log_t < 709.0 else math.inf
        if not math.isfinite(term):
            raise DivergenceError(
                f"series term {n} overflows",
                best_estimate=partial,
                error_bound=math.inf,
            )
        partial += -term if n % 2 else term
        max_term = max(max_term, term)
        log_next = log_term(n + 1)
        if log_next == -math.inf or math.exp(min(log_next, 709.0)) < tol * abs(partial):
            return SeriesSum(partial, n + 1, max_term)
        growing = growing + 1 if log_next >= log_t else 0
        log_t = log_next
    next_term = math.exp(min(log_t, 709.0))
    if growing:
        raise DivergenceError(
            f"series terms still growing after {n_max} terms",
            best_estimate=partial,
            error_bound=next_term,
        )
    raise ConvergenceError(
        f"series did not reach tol={tol} in {n_max} terms",
        best_estimate=partial,
        error_bound=next_term,
    )
