"""Monte Carlo generalization risk of the uniform-kernel estimator.

Each replication regenerates both training blocks and their noise from the
replication's streams, fits the estimator and integrates the squared error
against pi^Q: exactly over the states of a finite target, and over fresh
long-run draws of a continuous one.
"""

import math
from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np
import structlog
from joblib import Parallel, delayed
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from src.chains.continuous import stationary_draws
from src.chains.finite import FiniteKernel, stationary_finite
from src.chains.rng import Stream, stream_rng
from src.config import settings, worker_count
from src.estimator.nadaraya_watson import FittedNW, SearchMethod, fit_nw_paths, nw_predict
from src.risk.bounds import BoundTerms
from src.risk.model import ShiftModel, training_paths

logger = structlog.get_logger(__name__)

DEFAULT_TEST_N = 2000


class RiskReport(BaseModel):
    """Empirical generalization risk, optionally next to its upper bound.

    Attributes:
        empirical_risk: Mean over replications of the pi^Q-integrated squared error.
        std_error: Monte Carlo standard error across replications.
        h: Bandwidth.
        n_p: Source block size.
        n_q: Target block size.
        reps: Replication count.
        method: ``exact`` integration over finite states or ``surrogate`` draws.
        test_n: Test draws per replication (surrogate only).
        replications: Per-replication risks in replication order.
        bound: Upper bound at the same bandwidth, when evaluated.
    """

    model_config = ConfigDict(frozen=True)

    empirical_risk: float = Field(ge=0)
    std_error: float = Field(ge=0)
    h: float = Field(gt=0)
    n_p: int
    n_q: int
    reps: int = Field(ge=1)
    method: Literal["exact", "surrogate"]
    test_n: int | None = None
    replications: list[float] = Field(default_factory=list)
    bound: BoundTerms | None = None

    @property
    def constant_used(self) -> float | None:
        return self.bound.constant if self.bound else None

    def within_bound(self, slack_se: float = 3.0) -> bool:
        """True when the risk lies below the bound up to ``slack_se`` standard errors."""
        if self.bound is None:
            raise ValueError("no bound was evaluated for this report")
        return self.empirical_risk - slack_se * self.std_error <= self.bound.value

    def with_bound(self, bound: BoundTerms) -> "RiskReport":
        return self.model_copy(update={"bound": bound})


def mean_and_error(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error, summed in a fixed order."""
    reps = len(values)
    mean = math.fsum(values) / reps
    if reps == 1:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (reps - 1)
    return mean, math.sqrt(variance / reps)


def run_replications(func: Callable[[int], float], reps: int) -> list[float]:
    """Evaluate ``func(r)`` for r < reps on the worker pool, in replication order."""
    results = Parallel(n_jobs=worker_count(), prefer="threads")(
        delayed(func)(r) for r in range(reps)
    )
    return [float(v) for v in results]


def fit_replication(
    model: ShiftModel, h: float, seed: int, replication: int, search: SearchMethod = "kdtree"
) -> FittedNW:
    """Estimator trained on one replication's source and target blocks."""
    return fit_nw_paths(training_paths(model, seed, replication), h, model.space, search)


def squared_errors(model: ShiftModel, fitted: FittedNW, x: NDArray[np.float64]) -> NDArray[np.float64]:
    """(f_hat(x) - f*(x))^2 at each row of x."""
    return np.asarray((nw_predict(fitted, x) - model.regression(x)) ** 2)


def generalization_risk(
    model: ShiftModel,
    h: float,
    test_n: int | None = None,
    reps: int | None = None,
    seed: int = 0,
    search: SearchMethod = "kdtree",
) -> RiskReport:
    """Estimate E ||f_hat - f*||^2 in L^2(pi^Q).

    Args:
        model: Shift model.
        h: Bandwidth.
        test_n: Draws from pi^Q per replication for continuous targets.
        reps: Replications; defaults to ``settings.default_reps``.
        seed: Root seed. Replication r uses child r of every stream.
        search: Neighbour search backend.

    Returns:
        RiskReport without a bound.
    """
    reps = settings.default_reps if reps is None else reps
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    test_size = DEFAULT_TEST_N if test_n is None else test_n
    if test_size < 1:
        raise ValueError("test_n must be at least 1")
    target = model.target
    exact = isinstance(target, FiniteKernel)

    def replicate(r: int) -> float:
        fitted = fit_replication(model, h, seed, r, search)
        if isinstance(target, FiniteKernel):
            return float(stationary_finite(target) @ squared_errors(model, fitted, target.coords))
        test = stationary_draws(target, test_size, stream_rng(seed, Stream.TEST, r))
        return float(squared_errors(model, fitted, test).mean())

    risks = run_replications(replicate, reps)
    mean, error = mean_and_error(risks)
    logger.info(
        "generalization_risk_estimated",
        n_p=model.n_p,
        n_q=model.n_q,
        h=h,
        reps=reps,
        risk=mean,
        std_error=error,
    )
    return RiskReport(
        empirical_risk=mean,
        std_error=error,
        h=h,
        n_p=model.n_p,
        n_q=model.n_q,
        reps=reps,
        method="exact" if exact else "surrogate",
        test_n=None if exact else test_size,
        replications=risks,
    )
