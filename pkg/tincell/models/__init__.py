"""Pydantic models for network parameters, configuration and results."""

from tincell.models.network import (
    DistanceTriple,
    NetworkParams,
    SchedulingPolicy,
    TinParams,
)
from tincell.models.results import (
    AnalyticResult,
    ApproxResult,
    BracketResult,
    GainReport,
    MetricEstimate,
    OptimalMu,
    SeriesCoefficients,
)
from tincell.models.simulation import (
    NetworkRealization,
    SimulationConfig,
    TrialOutcomes,
    TypicalCell,
    Victims,
)
from tincell.models.config import (
    Engine,
    LoadedConfig,
    OutputConfig,
    QuadratureConfig,
    RunConfig,
    RunManifest,
    SweepSpec,
)

__all__ = [
    "DistanceTriple",
    "NetworkParams",
    "SchedulingPolicy",
    "TinParams",
    "AnalyticResult",
    "ApproxResult",
    "BracketResult",
    "GainReport",
    "MetricEstimate",
    "OptimalMu",
    "SeriesCoefficients",
    "NetworkRealization",
    "SimulationConfig",
    "TrialOutcomes",
    "TypicalCell",
    "Victims",
    "Engine",
    "LoadedConfig",
    "OutputConfig",
    "QuadratureConfig",
    "RunConfig",
    "RunManifest",
    "SweepSpec",
]
