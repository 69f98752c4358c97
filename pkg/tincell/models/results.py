"""Result records returned by the numerical engines."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class AnalyticResult(BaseModel):
    """Value of an analytical formula with its numerical-integration error."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(description="Probability, or rate in nats/sec/Hz")
    est_error: float = Field(default=0.0, ge=0, description="Quadrature error bound")


class ApproxResult(BaseModel):
    """Value of a high-SNR approximation together with regime flags.

    Flags are short tokens such as ``clamped`` (an unclamped closed form
    exceeded one) or ``resummed`` (a series was evaluated through its
    integral representation).
    """

    model_config = ConfigDict(frozen=True)

    value: float
    flags: tuple[str, ...] = Field(default=())

    @property
    def clamped(self) -> bool:
        return "clamped" in self.flags


class SeriesCoefficients(BaseModel):
    """Coefficients of the high-SNR power series at alpha = 4."""

    model_config = ConfigDict(frozen=True)

    a1: float = Field(gt=0, description="pi*lambda_b*beta^((2-mu)/4)")
    a2: float = Field(gt=0, description="pi^2*lambda_b*P[A_UE]*sqrt(theta)/2")
    r: float = Field(gt=0, description="a1^2 / a2^mu")


class OptimalMu(BaseModel):
    """Solution of the optimal-mu equation."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(ge=1, le=2)
    interior: bool = Field(description="True if a sign change was bracketed in [1, 2]")
    flag: str | None = Field(
        default=None,
        description="'tin-inactive-optimal' or 'tin-maximal' for boundary answers",
    )


class MetricEstimate(BaseModel):
    """Monte Carlo mean with a normal-approximation 95% half-width."""

    model_config = ConfigDict(frozen=True)

    mean: float
    ci95_halfwidth: float = Field(ge=0)
    trials_used: int = Field(ge=0)
    flagged: bool = Field(
        default=False, description="True when the estimate is undefined (no samples)"
    )


class GainReport(BaseModel):
    """Relative gain of a TIN policy over classical scheduling."""

    model_config = ConfigDict(frozen=True)

    baseline: float = Field(gt=0, description="Classical metric value")
    treatment: float = Field(description="TIN policy metric value")

    @property
    def relative_gain(self) -> float:
        return (self.treatment - self.baseline) / self.baseline


class BracketResult(BaseModel):
    """Outcome of a bracketed root search."""

    model_config = ConfigDict(frozen=True)

    root: float | None = Field(default=None, description="Root, if bracketed")
    bracketed: bool
    best_endpoint: float | None = Field(
        default=None, description="Endpoint minimizing |f| when no sign change"
    )

    @model_validator(mode="after")
    def _one_of(self) -> "BracketResult":
        if self.bracketed and self.root is None:
            raise ValueError("bracketed result needs a root")
        if not self.bracketed and self.best_endpoint is None:
            raise ValueError("unbracketed result needs best_endpoint")
        return self
