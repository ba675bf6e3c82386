"""Runners for ``kind: rho`` and ``kind: alpha-check``."""

import math
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray

from src.chains.continuous import ContinuousKernel, IndependenceKernel
from src.chains.distributions import UniformBox
from src.chains.finite import FiniteKernel, stationary_finite
from src.chains.metric import MetricSpaceSpec
from src.chains.rng import split_seed
from src.experiments.common import ExperimentResult, Table
from src.experiments.schema import AlphaCheckExperiment, RhoExperiment, RhoMethod
from src.risk.model import invariant_sampler, pooled_support
from src.similarity.explosion import ExplosionError, explosion_check
from src.similarity.families import InsufficientDataError, alpha_family_check, alpha_index_fit
from src.similarity.rho import (
    RHO_CSV_HEADER,
    RhoCurve,
    Sampler,
    SimilarityEstimate,
    law_sampler,
    rho_exact_curve,
    rho_mc_curve,
    rho_uniform_closed_form,
)

logger = structlog.get_logger(__name__)

Kernel = FiniteKernel | ContinuousKernel


def _unit_uniform(kernel: Kernel) -> bool:
    return (
        isinstance(kernel, IndependenceKernel)
        and isinstance(kernel.law, UniformBox)
        and kernel.law.lower == [0.0]
        and kernel.law.upper == [1.0]
    )


def _sampler(kernel: Kernel) -> Sampler:
    if isinstance(kernel, IndependenceKernel):
        return law_sampler(kernel.law)
    return invariant_sampler(kernel)


def resolve_method(method: RhoMethod, source: Kernel, target: Kernel) -> RhoMethod:
    """``auto`` picks exact for finite pairs, closed form for uniform pairs on [0,1], MC otherwise."""
    if method != "auto":
        return method
    if isinstance(source, FiniteKernel) and isinstance(target, FiniteKernel):
        return "exact"
    if _unit_uniform(source) and _unit_uniform(target):
        return "closed-form"
    return "monte-carlo"


def _mark_explosions(curve: RhoCurve, source: Kernel, target: Kernel) -> RhoCurve:
    """Flag bandwidths where the target support leaves the h-neighborhood of the source support."""
    if isinstance(source, FiniteKernel) or isinstance(target, FiniteKernel):
        return curve
    estimates = []
    for e in curve.estimates:
        report = explosion_check(source, target, e.h)
        if report.exploded and not e.explosion_flag:
            assert report.witness is not None
            e = SimilarityEstimate(
                h=e.h,
                value=math.inf,
                method=e.method,
                std_error=e.std_error,
                explosion_flag=True,
                witness=report.witness.lower,
                zero_cells=e.zero_cells,
                inner_budget=e.inner_budget,
                outer_budget=e.outer_budget,
            )
        estimates.append(e)
    return RhoCurve(estimates=estimates, label=curve.label)


def estimate_curve(
    source: Kernel,
    target: Kernel,
    grid: NDArray[np.float64],
    method: RhoMethod,
    seed: int | np.random.SeedSequence,
    space: MetricSpaceSpec,
    outer_n: int | None = None,
    inner_n: int | None = None,
    label: str = "",
) -> RhoCurve:
    """rho_h(pi^P, pi^Q) over ``grid`` by the resolved method.

    Raises:
        ValueError: If ``exact`` or ``closed-form`` is requested for chains that
            do not support it.
    """
    resolved = resolve_method(method, source, target)
    if resolved == "exact":
        if not (isinstance(source, FiniteKernel) and isinstance(target, FiniteKernel)):
            raise ValueError("exact rho_h needs finite source and target kernels")
        support = pooled_support(source, target)
        curve = rho_exact_curve(support.pi_p, support.pi_q, support.coords, grid, space)
    elif resolved == "closed-form":
        if not (_unit_uniform(source) and _unit_uniform(target)):
            raise ValueError("the closed form covers uniform laws on [0, 1] only")
        curve = RhoCurve.from_values(grid, [rho_uniform_closed_form(float(h)) for h in grid])
    else:
        curve = rho_mc_curve(_sampler(source), _sampler(target), grid, outer_n, inner_n, seed, space)
        curve = _mark_explosions(curve, source, target)
    logger.info(
        "rho_curve_estimated",
        label=label,
        method=resolved,
        points=len(curve.estimates),
        exploded=sum(e.explosion_flag for e in curve.estimates),
    )
    return curve.model_copy(update={"label": label})


def curve_data(curve: RhoCurve) -> dict[str, Any]:
    return {
        "h": curve.grid.tolist(),
        "value": curve.values.tolist(),
        "estimates": [e.model_dump() for e in curve.estimates],
    }


def _index_fit(curve: RhoCurve) -> dict[str, Any] | None:
    try:
        return alpha_index_fit(curve)._asdict()
    except InsufficientDataError as e:
        logger.warning("alpha_index_fit_skipped", label=curve.label, error=str(e))
        return None


def _space(config: RhoExperiment | AlphaCheckExperiment) -> MetricSpaceSpec:
    return MetricSpaceSpec(dimension=config.target.dimension, metric=config.metric)


def run_rho(config: RhoExperiment) -> ExperimentResult:
    """rho_h(pi^P, pi^Q) over the configured grid.

    Raises:
        ExplosionError: If ``require_finite`` is set and some rho_h is infinite.
    """
    curve = estimate_curve(
        config.source,
        config.target,
        config.grid.resolve(),
        config.method,
        config.seed,
        _space(config),
        config.outer_n,
        config.inner_n,
        label="PQ",
    )
    exploded = [e for e in curve.estimates if e.explosion_flag]
    if config.require_finite and exploded:
        first = exploded[0]
        raise ExplosionError(
            f"rho_h is infinite at h = {first.h:.6g}: target point {first.witness} "
            "has no source mass within h"
        )
    data: dict[str, Any] = {
        "method": resolve_method(config.method, config.source, config.target),
        "curves": {"PQ": curve_data(curve)},
        "exploded": [e.h for e in exploded],
        "fit": _index_fit(curve) if config.fit else None,
    }
    if isinstance(config.source, FiniteKernel) and isinstance(config.target, FiniteKernel):
        data["stationary"] = {
            "P": stationary_finite(config.source).tolist(),
            "Q": stationary_finite(config.target).tolist(),
        }
    return ExperimentResult(
        kind=config.kind,
        data=data,
        tables={"rho.csv": Table(header=RHO_CSV_HEADER, rows=curve.rows())},
    )


def run_alpha_check(config: AlphaCheckExperiment) -> ExperimentResult:
    """Estimate rho_h and test (h/D)^alpha rho_h <= C on the grid.

    The primed family also needs rho_h(pi^Q, pi^Q), estimated on an
    independent seed.
    """
    grid = config.grid.resolve()
    space = _space(config)
    seed_pq, seed_qq = split_seed(config.seed, 2)
    curve = estimate_curve(
        config.source,
        config.target,
        grid,
        config.method,
        seed_pq,
        space,
        config.outer_n,
        config.inner_n,
        label="PQ",
    )
    curves = {"PQ": curve}
    self_curve = None
    if config.alpha_prime is not None:
        self_curve = estimate_curve(
            config.target,
            config.target,
            grid,
            config.method,
            seed_qq,
            space,
            config.outer_n,
            config.inner_n,
            label="QQ",
        )
        curves["QQ"] = self_curve
    check = alpha_family_check(
        curve, config.alpha, config.constant, config.diameter, config.alpha_prime, self_curve
    )
    logger.info(
        "alpha_family_checked",
        alpha=config.alpha,
        alpha_prime=config.alpha_prime,
        constant=config.constant,
        sup_value=check.sup_value,
        verdict=check.verdict,
    )
    failure = None
    if check.verdict == "fail":
        failure = (
            f"alpha-family check failed: sup (h/D)^alpha rho_h = {check.sup_value:.6g} "
            f"exceeds C = {config.constant:.6g} at h = {check.witness_h}"
        )
    rows = [[label, *row] for label, c in curves.items() for row in c.rows()]
    return ExperimentResult(
        kind=config.kind,
        data={
            "check": check.model_dump(),
            "curves": {label: curve_data(c) for label, c in curves.items()},
        },
        tables={"rho.csv": Table(header=["curve", *RHO_CSV_HEADER], rows=rows)},
        verdict=check.verdict,
        failure=failure,
    )
