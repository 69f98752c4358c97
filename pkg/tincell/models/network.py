"""Physical network and scheduler parameter records."""

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class NetworkParams(BaseModel):
    """Physical description of the downlink network.

    Powers are linear and normalized; only their ratio ``beta`` enters any
    formula. Distances are in the unit implied by ``lambda_b``.
    """

    model_config = ConfigDict(frozen=True)

    lambda_b: float = Field(gt=0, description="BS density (points per unit area)")
    tx_power: float = Field(gt=0, description="Linear transmit power")
    noise_power: float = Field(gt=0, description="Linear noise power at the UE")
    alpha: float = Field(gt=2, description="Path-loss exponent")

    @property
    def beta(self) -> float:
        """Transmit-power-to-noise ratio P/N."""
        return self.tx_power / self.noise_power

    @property
    def log_beta(self) -> float:
        return math.log(self.tx_power) - math.log(self.noise_power)

    @classmethod
    def from_beta(cls, lambda_b: float, beta: float, alpha: float) -> "NetworkParams":
        """Build parameters from a power ratio, with unit noise power."""
        return cls(lambda_b=lambda_b, tx_power=beta, noise_power=1.0, alpha=alpha)


class TinParams(BaseModel):
    """The two design knobs of the TIN condition."""

    model_config = ConfigDict(frozen=True)

    m_factor: float = Field(default=1.0, ge=1, description="Relaxation factor M")
    mu: float = Field(default=2.0, ge=1, le=2, description="SNR exponent mu")

    @property
    def is_inactive(self) -> bool:
        """True when the condition can never switch a BS off (mu == 2)."""
        return self.mu == 2.0


class DistanceTriple(BaseModel):
    """The three distances that drive every TIN decision of a cell."""

    model_config = ConfigDict(frozen=True)

    x11: float = Field(gt=0, description="Serving BS to its tagged UE")
    x12: float = Field(gt=0, description="Serving BS to its most interfered UE")
    x21: float = Field(gt=0, description="Tagged UE to its strongest interferer")

    @model_validator(mode="after")
    def _nearest_bs_association(self) -> "DistanceTriple":
        if self.x21 < self.x11:
            raise ValueError("x21 must be >= x11 under nearest-BS association")
        return self


class SchedulingPolicy(str, Enum):
    """Which BSs stay on after step two of the scheduler."""

    CLASSICAL = "classical"
    TIN_EXACT = "tin-exact"
    TIN_SIMPLIFIED = "tin-simplified"
