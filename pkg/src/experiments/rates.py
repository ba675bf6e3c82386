"""Runner for ``kind: rate-sweep``."""

import structlog

from src.experiments.common import ExperimentResult, Table
from src.experiments.schema import RateSweepExperiment
from src.risk.rates import SWEEP_CSV_HEADER, measured_alpha_rule, rate_sweep

logger = structlog.get_logger(__name__)


def run_rate_sweep(config: RateSweepExperiment) -> ExperimentResult:
    """Risk at every n of the sweep and the fitted log-log slope.

    Raises:
        ExplosionError: If some point has an infinite rho_h.
        InsufficientDataError: With fewer than four sample sizes.
    """
    rule = config.rule
    if config.alpha_from == "rho-fit":
        rule = measured_alpha_rule(
            config.template,
            config.n_list,
            rule,
            config.vary,
            config.seed,
            config.outer_n,
            config.inner_n,
        )
    fit = rate_sweep(
        config.template,
        config.n_list,
        rule,
        config.reps,
        config.seed,
        config.vary,
        config.test_n,
    )
    verdict = None
    failure = None
    if config.tolerance is not None:
        target = fit.target_exponent
        if target is None:
            raise ValueError(f"bandwidth rule '{rule.rule}' predicts no exponent to check")
        passed = fit.matches(config.tolerance)
        verdict = "pass" if passed else "fail"
        if not passed:
            failure = f"fitted slope {fit.slope:.6g} is outside {target:.6g} +- {config.tolerance:g}"
    logger.info(
        "rate_sweep_completed",
        slope=fit.slope,
        target_exponent=fit.target_exponent,
        alpha=rule.alpha,
        verdict=verdict,
    )
    return ExperimentResult(
        kind=config.kind,
        data={
            "slope": fit.slope,
            "stderr": fit.stderr,
            "intercept": fit.intercept,
            "target_exponent": fit.target_exponent,
            "alpha_rule": config.rule.alpha,
            "alpha_used": rule.alpha,
            "points": [list(p) for p in fit.points],
        },
        tables={"rates.csv": Table(header=SWEEP_CSV_HEADER, rows=[r.csv_row() for r in fit.rows])},
        verdict=verdict,
        failure=failure,
    )
