"""Experiment configuration models.

An experiment file is a YAML mapping whose ``kind`` selects one of the
models below. Chains, warm starts, noise, regression functions and grids are
nested models, so validation errors are reported per field.
"""

from enum import Enum
from typing import Annotated, Any, Literal, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from src.chains.continuous import ContinuousKernelSpec
from src.chains.metric import Metric
from src.estimator.bandwidth import BandwidthRule
from src.risk.model import KernelSpec, ShiftModel
from src.similarity.rho import DEFAULT_GRID_POINTS, DEFAULT_GRID_RATIO, geometric_grid

RhoMethod = Literal["auto", "exact", "monte-carlo", "closed-form"]


class GridSpec(BaseModel):
    """An h-grid: explicit ``values`` or a geometric grid from D down to D/ratio."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    values: list[float] | None = Field(default=None, min_length=1)
    diameter: float = Field(default=1.0, gt=0)
    points: int = Field(default=DEFAULT_GRID_POINTS, ge=2)
    ratio: float = Field(default=DEFAULT_GRID_RATIO, gt=1)

    @field_validator("values")
    @classmethod
    def _positive(cls, v: list[float] | None) -> list[float] | None:
        if v is not None and any(h <= 0 for h in v):
            raise ValueError("bandwidths must be positive")
        return v

    def resolve(self) -> NDArray[np.float64]:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return geometric_grid(self.diameter, self.points, self.ratio)


class _Experiment(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = ""
    seed: int = Field(default=0, ge=0)
    output: str | None = Field(default=None, description="Output directory")


class SpectralExperiment(_Experiment):
    """Gaps, mixing times and Doeblin data for a set of named kernels."""

    kind: Literal["spectral"] = "spectral"
    kernels: dict[str, KernelSpec] = Field(min_length=1)
    k_max: int = Field(default=50, ge=1)
    doeblin_lag: int = Field(default=1, ge=1)


class _RhoInputs(_Experiment):
    source: KernelSpec
    target: KernelSpec
    grid: GridSpec = Field(default_factory=GridSpec)
    method: RhoMethod = "auto"
    outer_n: int | None = Field(default=None, ge=1)
    inner_n: int | None = Field(default=None, ge=1)
    metric: Metric = Metric.SUP_NORM

    @model_validator(mode="after")
    def _same_dimension(self) -> "_RhoInputs":
        if self.source.dimension != self.target.dimension:
            raise ValueError(
                f"source has dimension {self.source.dimension}, "
                f"target has dimension {self.target.dimension}"
            )
        return self


class RhoExperiment(_RhoInputs):
    """rho_h(pi^P, pi^Q) over a grid, with an optional log-log index fit."""

    kind: Literal["rho"] = "rho"
    require_finite: bool = False
    fit: bool = True


class AlphaCheckExperiment(_RhoInputs):
    """Grid evidence for membership in D(alpha, C) or D'(alpha, alpha', C)."""

    kind: Literal["alpha-check"] = "alpha-check"
    alpha: float = Field(ge=0)
    alpha_prime: float | None = Field(default=None, ge=0)
    constant: float = Field(ge=1)
    diameter: float = Field(default=1.0, gt=0)


class TransferCheckExperiment(_Experiment):
    """Grid search for the kernel transfer inequality between two continuous chains.

    ``gamma`` and ``constant`` default to the analytic values when both chains
    are beta chains.
    """

    kind: Literal["transfer-check"] = "transfer-check"
    source: ContinuousKernelSpec
    target: ContinuousKernelSpec
    gamma: float | None = Field(default=None, ge=0)
    constant: float | None = Field(default=None, gt=0)
    radius: float = Field(default=1.0, gt=0)
    x_points: int = Field(default=50, ge=1)
    y_points: int = Field(default=50, ge=1)
    h_grid: GridSpec = Field(default_factory=lambda: GridSpec(points=50, ratio=1000.0))

    @model_validator(mode="after")
    def _check(self) -> "TransferCheckExperiment":
        if (self.gamma is None) != (self.constant is None):
            raise ValueError("gamma and constant must be given together")
        return self


class RiskExperiment(_Experiment):
    """Generalization risk at one or more bandwidths, checked against a bound.

    With ``bound: finite`` or ``bound: alpha`` the bound's own bandwidth is
    used and ``bandwidths`` must be omitted.
    """

    kind: Literal["risk"] = "risk"
    model: ShiftModel
    bandwidths: list[float] | None = Field(default=None, min_length=1)
    bound: Literal["general", "finite", "alpha", "none"] = "general"
    slack_se: float = Field(default=3.0, ge=0)
    reps: int | None = Field(default=None, ge=2)
    test_n: int | None = Field(default=None, ge=1)
    outer_n: int | None = Field(default=None, ge=1)
    inner_n: int | None = Field(default=None, ge=1)
    finite_c: float = Field(default=0.5, gt=0, lt=1)
    alpha: float | None = Field(default=None, ge=0)
    alpha_prime: float | None = Field(default=None, ge=0)
    family_constant: float | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "RiskExperiment":
        if self.bandwidths is not None and any(h <= 0 for h in self.bandwidths):
            raise ValueError("bandwidths must be positive")
        if self.bound in ("general", "none") and self.bandwidths is None:
            raise ValueError(f"bound '{self.bound}' needs bandwidths")
        if self.bound in ("finite", "alpha") and self.bandwidths is not None:
            raise ValueError(f"bound '{self.bound}' selects its own bandwidth; omit bandwidths")
        if self.bound == "alpha" and (self.alpha is None or self.family_constant is None):
            raise ValueError("the alpha bound needs alpha and family_constant")
        return self


class RateSweepExperiment(_Experiment):
    """Risk along a geometric sequence of sample sizes and its log-log slope.

    With ``tolerance`` set the slope is checked against the exponent the
    bandwidth rule predicts. ``alpha_from: rho-fit`` replaces the alpha of an
    alpha rule by the growth index of rho_h measured over the sweep's
    bandwidths, with ``outer_n`` and ``inner_n`` as the Monte Carlo budgets.
    """

    kind: Literal["rate-sweep"] = "rate-sweep"
    template: ShiftModel
    n_list: list[int] = Field(min_length=1)
    rule: BandwidthRule = Field(default_factory=BandwidthRule)
    vary: Literal["n_p", "n_q", "both"] = "n_p"
    reps: int | None = Field(default=None, ge=2)
    test_n: int | None = Field(default=None, ge=1)
    tolerance: float | None = Field(default=None, gt=0)
    alpha_from: Literal["rule", "rho-fit"] = "rule"
    outer_n: int | None = Field(default=None, ge=1)
    inner_n: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "RateSweepExperiment":
        if self.alpha_from == "rho-fit" and self.rule.rule != "alpha":
            raise ValueError("alpha_from 'rho-fit' needs the alpha rule")
        return self


class PredictExperiment(_Experiment):
    """Prediction error m steps ahead against the generalization risk.

    ``max_slope`` bounds the fitted log-gap slope; ``gap_slack_se`` requires
    every gap to lie within that many standard errors of 0.
    """

    kind: Literal["predict"] = "predict"
    model: ShiftModel
    h: float = Field(gt=0)
    m_list: list[int] = Field(min_length=1)
    reps: int | None = Field(default=None, ge=2)
    test_n: int | None = Field(default=None, ge=1)
    envelope_constant: float = Field(default=1.0, gt=0)
    max_slope: float | None = None
    gap_slack_se: float | None = Field(default=None, gt=0)

    @field_validator("m_list")
    @classmethod
    def _positive_lags(cls, v: list[int]) -> list[int]:
        if any(m < 1 for m in v):
            raise ValueError("every m must be at least 1")
        return v


ExperimentConfig = Annotated[
    Union[
        SpectralExperiment,
        RhoExperiment,
        AlphaCheckExperiment,
        TransferCheckExperiment,
        RiskExperiment,
        RateSweepExperiment,
        PredictExperiment,
    ],
    Field(discriminator="kind"),
]

_ADAPTER: TypeAdapter[ExperimentConfig] = TypeAdapter(ExperimentConfig)


def parse_experiment(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a configuration tree.

    Raises:
        pydantic.ValidationError: With one entry per offending field.
    """
    return _ADAPTER.validate_python(data)


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    return value


def dump_experiment(config: ExperimentConfig) -> dict[str, Any]:
    """Resolved configuration as plain YAML-safe data; ``parse_experiment`` inverts it."""
    return dict(_plain(config.model_dump(by_alias=True)))
