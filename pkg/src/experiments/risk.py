"""Runners for ``kind: risk`` and ``kind: predict``."""

from typing import Any

import structlog

from src.experiments.common import ExperimentResult, Table
from src.experiments.schema import PredictExperiment, RiskExperiment
from src.risk.bounds import (
    alpha_rate_bound,
    finite_upper_bound,
    mixture_rho,
    target_second_moment,
    theoretical_upper_bound,
)
from src.risk.generalization import RiskReport, generalization_risk
from src.risk.prediction import gap_vs_generalization
from src.risk.rates import check_finite_similarity

logger = structlog.get_logger(__name__)

RISK_CSV_HEADER = ["h", "risk", "se", "bound", "bias", "stochastic", "rho", "constant", "within_bound"]
DECAY_CSV_HEADER = ["m", "prediction", "generalization", "gap", "se", "envelope"]


def _row(
    report: RiskReport,
    slack_se: float,
    bound: float | None = None,
    bias: float | None = None,
    stochastic: float | None = None,
    rho: float | None = None,
    constant: float | None = None,
) -> list[Any]:
    within = None if bound is None else report.empirical_risk - slack_se * report.std_error <= bound
    return [
        report.h,
        report.empirical_risk,
        report.std_error,
        bound,
        bias,
        stochastic,
        rho,
        constant,
        within,
    ]


def _general_rows(
    config: RiskExperiment, details: list[dict[str, Any]], extra: dict[str, Any]
) -> list[list[Any]]:
    model = config.model
    assert config.bandwidths is not None
    grid = list(config.bandwidths)
    for h in grid:
        check_finite_similarity(model, h)
    rows = []
    if config.bound == "none":
        for h in grid:
            report = generalization_risk(model, h, config.test_n, config.reps, config.seed)
            rows.append(_row(report, config.slack_se))
            details.append(report.model_dump())
        return rows

    curve = mixture_rho(model, grid, config.seed, config.outer_n, config.inner_n)
    moment = target_second_moment(model, config.seed).mean
    extra["second_moment"] = moment
    for h, estimate in zip(grid, curve.estimates, strict=True):
        terms = theoretical_upper_bound(
            model, h, estimate.value, second_moment=moment, seed=config.seed
        )
        report = generalization_risk(model, h, config.test_n, config.reps, config.seed)
        report = report.with_bound(terms)
        rows.append(
            _row(
                report,
                config.slack_se,
                terms.value,
                terms.bias,
                terms.stochastic,
                terms.rho,
                terms.constant,
            )
        )
        details.append(report.model_dump())
    return rows


def _rate_rows(
    config: RiskExperiment, details: list[dict[str, Any]], extra: dict[str, Any]
) -> list[list[Any]]:
    model = config.model
    if config.bound == "finite":
        finite = finite_upper_bound(model, config.finite_c)
        h = finite.bandwidth
        terms: tuple[float | None, ...] = (
            finite.value,
            finite.bias,
            finite.stochastic,
            None,
            finite.constant,
        )
        extra["bound"] = finite.model_dump()
    else:
        assert config.alpha is not None and config.family_constant is not None
        rate = alpha_rate_bound(model, config.alpha, config.family_constant, config.alpha_prime)
        h = rate.bandwidth
        terms = (rate.value, None, None, None, rate.constant)
        extra["bound"] = rate.model_dump()
    check_finite_similarity(model, h)
    report = generalization_risk(model, h, config.test_n, config.reps, config.seed)
    details.append(report.model_dump())
    return [_row(report, config.slack_se, *terms)]


def run_risk(config: RiskExperiment) -> ExperimentResult:
    """Generalization risk per bandwidth next to the configured bound.

    ``general`` evaluates the bound at every configured bandwidth;
    ``finite`` and ``alpha`` evaluate the risk at the bound's own bandwidth.

    Raises:
        ExplosionError: If rho_h(mu_n, pi^Q) is infinite at a bandwidth.
        PreconditionError: If a block is too short for the bound.
    """
    details: list[dict[str, Any]] = []
    extra: dict[str, Any] = {}
    if config.bound in ("general", "none"):
        rows = _general_rows(config, details, extra)
    else:
        rows = _rate_rows(config, details, extra)

    violations = [row[0] for row in rows if row[-1] is False]
    verdict = None if config.bound == "none" else ("fail" if violations else "pass")
    failure = None
    if violations:
        failure = (
            f"empirical risk exceeds the {config.bound} bound by more than "
            f"{config.slack_se:g} standard errors at h = {violations}"
        )
    logger.info("risk_experiment_completed", bound=config.bound, points=len(rows), verdict=verdict)
    return ExperimentResult(
        kind=config.kind,
        data={"bound": config.bound, "reports": details, **extra},
        tables={"risk.csv": Table(header=RISK_CSV_HEADER, rows=rows)},
        verdict=verdict,
        failure=failure,
    )


def run_predict(config: PredictExperiment) -> ExperimentResult:
    """Prediction-vs-generalization gap over the configured lags.

    Raises:
        ExplosionError: If rho_h(mu_n, pi^Q) is infinite at h.
    """
    check_finite_similarity(config.model, config.h)
    table = gap_vs_generalization(
        config.model,
        config.h,
        config.m_list,
        config.reps,
        config.seed,
        config.test_n,
        config.envelope_constant,
    )
    problems = []
    if config.gap_slack_se is not None:
        wide = [row.m for row in table.rows if row.gap > config.gap_slack_se * row.std_error]
        if wide:
            problems.append(f"gap exceeds {config.gap_slack_se:g} standard errors at m = {wide}")
    if config.max_slope is not None:
        if table.slope is None:
            problems.append("too few positive gaps to fit a decay slope")
        elif table.slope > config.max_slope:
            problems.append(f"gap decay slope {table.slope:.6g} exceeds {config.max_slope:.6g}")
    checked = config.gap_slack_se is not None or config.max_slope is not None
    verdict = ("fail" if problems else "pass") if checked else None
    logger.info("predict_experiment_completed", h=config.h, slope=table.slope, verdict=verdict)
    rows = [[r.m, r.prediction, r.generalization, r.gap, r.std_error, r.envelope] for r in table.rows]
    return ExperimentResult(
        kind=config.kind,
        data={"decay": table.model_dump()},
        tables={"decay.csv": Table(header=DECAY_CSV_HEADER, rows=rows)},
        verdict=verdict,
        failure="; ".join(problems) or None,
    )
