"""Records for the Monte Carlo engine."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from tincell.models.network import NetworkParams, SchedulingPolicy


class TypicalCell(str, Enum):
    """How the typical cell of a realization is chosen."""

    CROFTON = "crofton"
    RANDOM = "random"


class Victims(str, Enum):
    """Which tagged UEs count as victims when measuring X12."""

    ALL = "all"
    ACTIVE = "active"


def check_window(window_side: float, lambda_b: float, min_expected_bs: int) -> None:
    """Raise ValueError if the window holds too few BSs on average."""
    expected = window_side**2 * lambda_b
    if expected < min_expected_bs:
        raise ValueError(
            f"window_side={window_side} gives {expected:.1f} expected BSs, "
            f"need at least {min_expected_bs}"
        )


class SimulationConfig(BaseModel):
    """Finite-window realization settings."""

    model_config = ConfigDict(frozen=True)

    window_side: float | None = Field(
        default=None,
        gt=0,
        description="Side of the square window; sized from min_expected_bs if unset",
    )
    guard_fraction: float = Field(default=0.25, ge=0, lt=0.5)
    trials: int = Field(default=200_000, ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    policy: SchedulingPolicy = SchedulingPolicy.TIN_SIMPLIFIED
    min_expected_bs: int = Field(default=500, ge=1)
    typical_cell: TypicalCell = TypicalCell.RANDOM
    lambda_u: float | None = Field(
        default=None, gt=0, description="UE density; None for one UE in every cell"
    )
    victims: Victims = Victims.ALL
    workers: int = Field(default=1, ge=1)
    lambda_b: float | None = Field(
        default=None,
        gt=0,
        description="BS density the window is checked against at construction",
    )

    @model_validator(mode="after")
    def _window_holds_enough_bs(self) -> "SimulationConfig":
        if self.window_side is not None and self.lambda_b is not None:
            check_window(self.window_side, self.lambda_b, self.min_expected_bs)
        return self

    def resolve_window(self, net: NetworkParams) -> float:
        """Return the window side for ``net``.

        Raises:
            ValueError: If an explicit window holds fewer than
                ``min_expected_bs`` BSs on average
        """
        if self.window_side is None:
            return math.sqrt(self.min_expected_bs / net.lambda_b)
        check_window(self.window_side, net.lambda_b, self.min_expected_bs)
        return self.window_side


@dataclass(frozen=True)
class NetworkRealization:
    """One drop of BSs and their tagged UEs.

    Attributes:
        bs_points: (n, 2) BS positions
        tagged_ue: (n, 2) tagged UE of each cell; NaN rows for idle cells
        typical_index: Index of the typical cell
        window_side: Side of the square window the drop lives in
    """

    bs_points: np.ndarray
    tagged_ue: np.ndarray
    typical_index: int
    window_side: float

    @property
    def has_ue(self) -> np.ndarray:
        return ~np.isnan(self.tagged_ue[:, 0])


@dataclass(frozen=True)
class TrialOutcomes:
    """Per-trial results of the typical cell, ordered by trial index.

    ``sinr`` is NaN on trials where the typical cell was switched off.
    """

    active: np.ndarray
    sinr: np.ndarray
    triples: np.ndarray

    @property
    def trials(self) -> int:
        return int(self.active.size)
