"""TIN scheduling conditions, inhomogeneity radius and unit conversions.

Powers and ratios are compared in natural-log space: beta is of order
10^15 and distances enter with exponent alpha, which overflows quickly in
linear form.
"""

import math

import numpy as np
from numpy.typing import ArrayLike

from tincell.models.network import DistanceTriple, NetworkParams, TinParams


def beta_from_dbm(p_dbm: float, n_dbm: float) -> float:
    """Linear power-to-noise ratio from powers given in dBm."""
    return 10.0 ** ((p_dbm - n_dbm) / 10.0)


def inhomogeneity_radius(x11: float, net: NetworkParams, tin: TinParams) -> float:
    """Radius of the ball around the typical UE free of active interferers.

    max(x11, x11^(mu/2) * beta^((2-mu)/(2 alpha)) * M^(-1/(2 alpha)))
    """
    return float(inhomogeneity_radius_array(x11, net, tin))


def inhomogeneity_radius_array(
    x11: ArrayLike, net: NetworkParams, tin: TinParams
) -> np.ndarray:
    x11 = np.asarray(x11, dtype=float)
    log_tin = (
        0.5 * tin.mu * np.log(x11)
        + (2.0 - tin.mu) / (2.0 * net.alpha) * net.log_beta
        - math.log(tin.m_factor) / (2.0 * net.alpha)
    )
    return np.maximum(x11, np.exp(log_tin))


def tin_radius_kink(net: NetworkParams, tin: TinParams) -> float:
    """x11 above which the radius equals x11 itself."""
    if tin.mu == 2.0:
        return 0.0
    log_kink = (net.log_beta - math.log(tin.m_factor) / (2.0 - tin.mu)) / net.alpha
    return math.exp(log_kink)


def exact_log_margin(
    x11: ArrayLike,
    x12: ArrayLike,
    x21: ArrayLike,
    net: NetworkParams,
    tin: TinParams,
) -> np.ndarray:
    """alpha*mu times the log-slack of the exact condition; >= 0 keeps the BS on.

    ln M + (mu - 2) ln beta + alpha (ln x12 + ln x21) - alpha mu ln x11
    """
    return (
        math.log(tin.m_factor)
        + (tin.mu - 2.0) * net.log_beta
        + net.alpha * (np.log(x12) + np.log(x21))
        - net.alpha * tin.mu * np.log(x11)
    )


def tin_exact_mask(x11, x12, x21, net: NetworkParams, tin: TinParams) -> np.ndarray:
    """Vectorized exact condition over arrays of distances."""
    return exact_log_margin(x11, x12, x21, net, tin) >= 0.0


def tin_simplified_mask(x11, x21, net: NetworkParams, tin: TinParams) -> np.ndarray:
    """Vectorized simplified condition (x12 replaced by x21)."""
    return exact_log_margin(x11, x21, x21, net, tin) >= 0.0


def tin_exact_predicate(d: DistanceTriple, net: NetworkParams, tin: TinParams) -> bool:
    """True if the cell with distances ``d`` stays active under the exact condition.

    X11 <= M^(1/(alpha mu)) (N/P)^((2-mu)/(alpha mu)) (X12 X21)^(1/mu)
    """
    return bool(tin_exact_mask(d.x11, d.x12, d.x21, net, tin))


def tin_simplified_predicate(
    x11: float, x21: float, net: NetworkParams, tin: TinParams
) -> bool:
    """Simplified condition, where the victim distance is approximated by x21.

    X11 <= M^(1/(alpha mu)) (N/P)^((2-mu)/(alpha mu)) X21^(2/mu)
    """
    return bool(tin_simplified_mask(x11, x21, net, tin))
