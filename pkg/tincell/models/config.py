"""Configuration models for analytic evaluation, simulation and sweeps."""

import math
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tincell.models.network import NetworkParams, SchedulingPolicy, TinParams
from tincell.models.simulation import (
    SimulationConfig,
    TypicalCell,
    Victims,
    check_window,
)

SCHEMA_VERSION = 1

# Settings that change how a run executes but never what it computes.
EXECUTION_FIELDS = frozenset({"workers"})


class QuadratureConfig(BaseModel):
    """Tolerances for adaptive quadrature."""

    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-8, gt=0, description="Relative tolerance")
    abs_tol: float = Field(default=1e-12, ge=0, description="Absolute tolerance")
    max_subdivisions: int = Field(default=2000, ge=1, description="Subinterval budget")


class Engine(str, Enum):
    ANALYTIC = "analytic"
    ASYMPTOTIC = "asymptotic"
    SIMULATION = "simulation"


class RunConfig(BaseModel):
    """Flat run configuration, as read from a config file.

    Defaults describe a dense macro-cell layout: P = 46 dBm, N = -110 dBm,
    alpha = 4, lambda_b = 5, M = 1, mu = 1.8, theta = 10 dB.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: int = Field(default=SCHEMA_VERSION)
    lambda_b: float = Field(default=5.0, gt=0, description="BS density")
    p_dbm: float = Field(default=46.0, description="Transmit power in dBm")
    n_dbm: float = Field(default=-110.0, description="Noise power in dBm")
    alpha: float = Field(default=4.0, gt=2, description="Path-loss exponent")
    m_factor: float = Field(default=1.0, ge=1, description="TIN relaxation factor M")
    mu: float = Field(default=1.8, ge=1, le=2, description="TIN exponent mu")
    theta_db: float = Field(default=10.0, description="SINR threshold in dB")
    window_side: float | None = Field(default=None, gt=0)
    guard_fraction: float = Field(default=0.25, ge=0, lt=0.5)
    trials: int = Field(default=200_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    typical_cell: TypicalCell = TypicalCell.RANDOM
    lambda_u_mode: Literal["infinite", "finite"] = "infinite"
    lambda_u: float | None = Field(default=None, gt=0)
    victims: Victims = Victims.ALL
    min_expected_bs: int = Field(default=500, ge=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("schema_version")
    @classmethod
    def _supported_schema(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {v}, expected {SCHEMA_VERSION}"
            )
        return v

    @model_validator(mode="after")
    def _finite_mode_needs_density(self) -> "RunConfig":
        if self.lambda_u_mode == "finite" and self.lambda_u is None:
            raise ValueError("lambda_u_mode='finite' requires lambda_u")
        return self

    @model_validator(mode="after")
    def _window_holds_enough_bs(self) -> "RunConfig":
        if self.window_side is not None:
            check_window(self.window_side, self.lambda_b, self.min_expected_bs)
        return self

    @property
    def theta(self) -> float:
        return 10.0 ** (self.theta_db / 10.0)

    def network(self) -> NetworkParams:
        from tincell.services.conditions import beta_from_dbm

        beta = beta_from_dbm(self.p_dbm, self.n_dbm)
        return NetworkParams.from_beta(self.lambda_b, beta, self.alpha)

    def tin(self) -> TinParams:
        return TinParams(m_factor=self.m_factor, mu=self.mu)

    def simulation(self, policy: SchedulingPolicy) -> SimulationConfig:
        return SimulationConfig(
            window_side=self.window_side,
            guard_fraction=self.guard_fraction,
            trials=self.trials,
            master_seed=self.seed,
            policy=policy,
            min_expected_bs=self.min_expected_bs,
            typical_cell=self.typical_cell,
            lambda_u=self.lambda_u if self.lambda_u_mode == "finite" else None,
            victims=self.victims,
            workers=self.workers,
            lambda_b=self.lambda_b,
        )


SweepAxis = Literal["theta_db", "lambda_b", "mu", "m_factor", "alpha"]


class SweepSpec(BaseModel):
    """A one-dimensional grid over a run parameter."""

    model_config = ConfigDict(frozen=True)

    axis: SweepAxis
    values: tuple[float, ...] = Field(min_length=1)
    fixed: RunConfig = Field(default_factory=RunConfig)
    engines: frozenset[Engine] = frozenset({Engine.ANALYTIC})
    policies: tuple[SchedulingPolicy, ...] = (SchedulingPolicy.TIN_SIMPLIFIED,)

    @field_validator("values")
    @classmethod
    def _sorted(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("sweep values must be sorted ascending")
        return v

    @model_validator(mode="after")
    def _points_are_valid(self) -> "SweepSpec":
        for value in self.values:
            self.point(value)
        return self

    def point(self, value: float) -> RunConfig:
        """Run configuration at one grid value (validated)."""
        return RunConfig.model_validate({**self.fixed.model_dump(), self.axis: value})


class OutputConfig(BaseModel):
    """Configuration for result emission."""

    format: Literal["csv", "json"] = Field(default="csv", description="Table format")
    out_path: Path | None = Field(default=None, description="Write the table here")
    bits: bool = Field(default=False, description="Report rates in bits, not nats")
    quiet: bool = Field(default=False, description="Suppress progress output")

    @property
    def rate_scale(self) -> float:
        return 1.0 / math.log(2.0) if self.bits else 1.0


class LoadedConfig(BaseModel):
    """A resolved run configuration and where its values came from."""

    model_config = ConfigDict(frozen=True)

    run: RunConfig
    source: Path | None = Field(default=None, description="Config file, if any")
    defaults: tuple[str, ...] = Field(
        default=(), description="Fields left at their built-in defaults"
    )
    from_env: tuple[str, ...] = Field(
        default=(), description="Fields taken from TINCELL_* environment variables"
    )

    @property
    def beta(self) -> float:
        return self.run.network().beta


class RunManifest(BaseModel):
    """Everything needed to reproduce one emitted table."""

    command: str
    version: str
    schema_version: int = SCHEMA_VERSION
    config: RunConfig
    defaults: tuple[str, ...] = ()
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    engines: tuple[Engine, ...] = ()
    policies: tuple[SchedulingPolicy, ...] = ()
    options: dict[str, str | float | int | bool | None] = Field(default_factory=dict)
    artifacts: dict[str, str] = Field(
        default_factory=dict, description="File name to sha256 checksum"
    )

    def reproducible(self) -> dict:
        """JSON-ready manifest without execution settings.

        This is the form embedded in result tables, so a table does not
        depend on how many workers produced it.
        """
        data = self.model_dump(mode="json", exclude={"config": set(EXECUTION_FIELDS)})
        data["defaults"] = [f for f in self.defaults if f not in EXECUTION_FIELDS]
        return data
