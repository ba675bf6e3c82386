"""Prediction error at a future state of the target chain.

The target chain that produced the Q block is continued m steps past its
last training state and the estimator is scored there, without response
noise. For finite targets the conditional expectation over Q^m(x_last, .)
is computed exactly; continuous targets use independent continuations.
"""

import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import linregress

from src.chains.continuous import ContinuousKernel, continue_chains
from src.chains.finite import FiniteKernel, stationary_finite
from src.chains.rng import Stream, stream_rng
from src.config import settings
from src.estimator.nadaraya_watson import SearchMethod, fit_nw_paths
from src.risk.generalization import (
    DEFAULT_TEST_N,
    generalization_risk,
    mean_and_error,
    run_replications,
    squared_errors,
)
from src.risk.model import ShiftModel, state_index, training_paths
from src.spectral.gaps import DoeblinRate, SpectralError, doeblin_to_rate, finite_doeblin

logger = structlog.get_logger(__name__)


class PredictionReport(BaseModel):
    """Prediction error m steps past the target block.

    Attributes:
        m: Steps past the last target training state.
        estimate: Mean squared error at the future state over replications.
        std_error: Standard error across replications.
        reps: Replication count.
        method: ``exact-conditional`` for finite targets, ``continuation`` otherwise.
        test_n: Continuations per replication (continuous targets).
        replications: Per-replication errors in replication order.
        multiplier: sup_x max_j Q^m(x, j) / pi^Q_j for finite targets.
    """

    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    estimate: float = Field(ge=0)
    std_error: float = Field(ge=0)
    reps: int = Field(ge=1)
    method: Literal["exact-conditional", "continuation"]
    test_n: int | None = None
    replications: list[float] = Field(default_factory=list)
    multiplier: float | None = None


class DecayRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    prediction: float
    generalization: float
    gap: float
    std_error: float
    envelope: float | None = None


class DecayTable(BaseModel):
    """|prediction_error(m) - generalization_risk| over a list of m."""

    model_config = ConfigDict(frozen=True)

    h: float
    rows: list[DecayRow]
    slope: float | None = Field(default=None, description="Fitted slope of log gap in m")
    kappa: float | None = None

    @property
    def gaps(self) -> list[float]:
        return [row.gap for row in self.rows]


def transition_multiplier(kernel: FiniteKernel, m: int) -> float:
    """M = max over x, j of Q^m(x, j) / pi_j."""
    return float(np.max(kernel.power(m) / stationary_finite(kernel)[None, :]))


def target_rate(kernel: FiniteKernel | ContinuousKernel, lag: int = 1) -> DoeblinRate:
    """Uniform ergodicity constants (kappa, c) of the target kernel.

    Raises:
        SpectralError: If a finite kernel has no minorization at ``lag``.
    """
    if isinstance(kernel, FiniteKernel):
        epsilon = finite_doeblin(kernel, lag)
        if epsilon <= 0:
            raise SpectralError(f"no Doeblin minorization at lag {lag}")
        return doeblin_to_rate(epsilon, lag)
    epsilon, minorization_lag = kernel.doeblin()
    return doeblin_to_rate(epsilon, minorization_lag)


def prediction_envelope(
    model: ShiftModel, m: int, constant: float = 1.0, rate: DoeblinRate | None = None
) -> float:
    """4 c kappa^m (||f*||_inf^2 + C sigma^2 zeta^2 (1 + log(n_P v n_Q)))."""
    kappa, c = rate if rate is not None else target_rate(model.target)
    if kappa == 0:
        return 0.0
    f = model.regression
    noise = model.noise
    log_term = 1.0 + math.log(max(model.n_p, model.n_q))
    return float(
        4.0 * c * kappa**m * (f.sup_norm() ** 2 + constant * noise.sigma**2 * noise.zeta**2 * log_term)
    )


def prediction_error(
    model: ShiftModel,
    h: float,
    m: int,
    reps: int | None = None,
    seed: int = 0,
    test_n: int | None = None,
    search: SearchMethod = "kdtree",
) -> PredictionReport:
    """Estimate E[(f_hat(X^Q_{n_Q-1+m}) - f*(X^Q_{n_Q-1+m}))^2].

    Training blocks are those of :func:`generalization_risk` with the same
    seed, so both estimates share their replications.

    Raises:
        ValueError: If the model has no target block or m < 1.
    """
    if model.n_q < 1:
        raise ValueError("prediction error needs a target block (n_Q >= 1)")
    if m < 1:
        raise ValueError("m must be at least 1")
    reps = settings.default_reps if reps is None else reps
    if reps < 1:
        raise ValueError("reps must be at least 1")
    test_size = DEFAULT_TEST_N if test_n is None else test_n
    target = model.target
    transition = target.power(m) if isinstance(target, FiniteKernel) else None

    def replicate(r: int) -> float:
        paths = training_paths(model, seed, r)
        fitted = fit_nw_paths(paths, h, model.space, search)
        last = paths[-1].last_state
        if isinstance(target, FiniteKernel):
            assert transition is not None
            row = transition[state_index(target, last)]
            return float(row @ squared_errors(model, fitted, target.coords))
        starts = np.repeat(last[None, :], test_size, axis=0)
        future = continue_chains(target, starts, m, stream_rng(seed, Stream.TEST, r))
        return float(squared_errors(model, fitted, future).mean())

    errors = run_replications(replicate, reps)
    mean, error = mean_and_error(errors)
    finite = isinstance(target, FiniteKernel)
    logger.info("prediction_error_estimated", m=m, h=h, reps=reps, error=mean, std_error=error)
    return PredictionReport(
        m=m,
        estimate=mean,
        std_error=error,
        reps=reps,
        method="exact-conditional" if finite else "continuation",
        test_n=None if finite else test_size,
        replications=errors,
        multiplier=transition_multiplier(target, m) if isinstance(target, FiniteKernel) else None,
    )


def gap_vs_generalization(
    model: ShiftModel,
    h: float,
    m_list: Sequence[int],
    reps: int | None = None,
    seed: int = 0,
    test_n: int | None = None,
    envelope_constant: float = 1.0,
) -> DecayTable:
    """Decay of the prediction-vs-generalization gap in m.

    The gap and its standard error come from per-replication differences,
    which share training samples. The slope is a least-squares fit of
    log gap against m over the positive gaps.
    """
    risk = generalization_risk(model, h, test_n, reps, seed)
    try:
        rate: DoeblinRate | None = target_rate(model.target)
    except SpectralError as e:
        logger.warning("prediction_envelope_unavailable", error=str(e))
        rate = None
    rows = []
    for m in m_list:
        report = prediction_error(model, h, m, risk.reps, seed, test_n)
        diffs = [p - g for p, g in zip(report.replications, risk.replications, strict=True)]
        mean, error = mean_and_error(diffs)
        rows.append(
            DecayRow(
                m=m,
                prediction=report.estimate,
                generalization=risk.empirical_risk,
                gap=abs(mean),
                std_error=error,
                envelope=prediction_envelope(model, m, envelope_constant, rate) if rate is not None else None,
            )
        )
    positive = [(row.m, row.gap) for row in rows if row.gap > 0]
    slope = None
    if len(positive) >= 2 and len({m for m, _ in positive}) >= 2:
        fit = linregress([m for m, _ in positive], [math.log(g) for _, g in positive])
        slope = float(fit.slope)
    return DecayTable(h=h, rows=rows, slope=slope, kappa=rate.kappa if rate is not None else None)
