"""Empirical convergence rates over sample-size sweeps."""

import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import linregress

from src.chains.finite import FiniteKernel
from src.estimator.bandwidth import BandwidthError, BandwidthRule, shift_exponent
from src.risk.bounds import (
    PreconditionError,
    finite_upper_bound,
    mixture_rho,
    theoretical_upper_bound,
)
from src.risk.generalization import generalization_risk
from src.risk.model import ShiftModel
from src.similarity.explosion import ExplosionError, explosion_check
from src.similarity.families import InsufficientDataError, alpha_index_fit

logger = structlog.get_logger(__name__)

MIN_SWEEP_POINTS = 4
GEOMETRIC_TOLERANCE = 0.1
ALPHA_FIT_POINTS = 8
ALPHA_FIT_ROUNDS = 3

SweepBlock = Literal["n_p", "n_q", "both"]

SWEEP_CSV_HEADER = ["n", "n_P", "n_Q", "h", "risk", "se", "bound"]


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    n_p: int
    n_q: int
    h: float
    risk: float
    se: float
    bound: float | None = None

    def csv_row(self) -> list[object]:
        return [self.n, self.n_p, self.n_q, self.h, self.risk, self.se, "" if self.bound is None else self.bound]


class RateFit(BaseModel):
    """Least-squares slope of log risk against log n.

    Attributes:
        points: (n, risk) pairs.
        slope: Fitted exponent.
        stderr: Standard error of the slope.
        intercept: Fitted intercept.
        target_exponent: Exponent predicted for the bandwidth rule, if known.
        rows: Sweep table behind the fit.
    """

    model_config = ConfigDict(frozen=True)

    points: list[tuple[float, float]]
    slope: float
    stderr: float
    intercept: float
    target_exponent: float | None = None
    rows: list[SweepRow] = Field(default_factory=list)

    def matches(self, tolerance: float) -> bool:
        """True when the slope lies within ``tolerance`` of the target exponent."""
        if self.target_exponent is None:
            raise ValueError("no target exponent to compare against")
        return abs(self.slope - self.target_exponent) <= tolerance


def fit_rate(
    ns: Sequence[float], risks: Sequence[float], target_exponent: float | None = None
) -> RateFit:
    """Fit log risk = slope * log n + intercept.

    Raises:
        InsufficientDataError: With fewer than three positive risks.

    Examples:
        >>> fit = fit_rate([10, 100, 1000], [0.1, 0.01, 0.001])
        >>> round(fit.slope, 12)
        -1.0
    """
    pairs = [(float(n), float(r)) for n, r in zip(ns, risks, strict=True) if r > 0 and math.isfinite(r)]
    if len(pairs) < 3:
        raise InsufficientDataError(f"a rate fit needs three positive risks, got {len(pairs)}")
    fit = linregress(np.log([n for n, _ in pairs]), np.log([r for _, r in pairs]))
    return RateFit(
        points=pairs,
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        target_exponent=target_exponent,
    )


def expected_exponent(rule: BandwidthRule, dimension: int, vary: SweepBlock, n_q: int) -> float | None:
    """Slope predicted for a sweep, or None when the rule has no rate attached.

    ``no-shift`` gives -2 beta/(2 beta + d); ``alpha`` gives -2 beta/(2 beta + alpha)
    when only n_P grows with n_Q = 0 and -2 beta/(2 beta + zeta) when n_Q grows.
    """
    beta = rule.beta
    if rule.rule == "no-shift":
        return -2.0 * beta / (2.0 * beta + dimension)
    if rule.rule != "alpha" or rule.alpha is None:
        return None
    if vary == "n_p" and n_q == 0:
        return -2.0 * beta / (2.0 * beta + rule.alpha)
    if vary == "n_q":
        zeta = shift_exponent(rule.alpha, dimension, rule.alpha_prime)
        return -2.0 * beta / (2.0 * beta + zeta)
    return None


def _sizes(template: ShiftModel, n: int, vary: SweepBlock) -> tuple[int, int]:
    if vary == "n_p":
        return n, template.n_q
    if vary == "n_q":
        return template.n_p, n
    share = template.n_p / template.n
    n_p = int(round(share * n))
    return n_p, n - n_p


def check_finite_similarity(model: ShiftModel, h: float) -> None:
    """Refuse designs whose rho_h(mu_n, pi^Q) is infinite.

    A target block keeps rho_h finite. Otherwise finite models are checked
    exactly and continuous ones by their supports.

    Raises:
        ExplosionError: With the witness of the unreachable target region.
    """
    if model.n_q > 0:
        return
    if model.finite:
        estimate = mixture_rho(model, [h]).estimates[0]
        if estimate.explosion_flag:
            raise ExplosionError(
                f"rho_h is infinite at h = {h:.6g}: target state {estimate.witness} "
                "has no source mass within h"
            )
        return
    if isinstance(model.source, FiniteKernel) or isinstance(model.target, FiniteKernel):
        return
    report = explosion_check(model.source, model.target, h)
    if report.exploded:
        assert report.witness is not None
        raise ExplosionError(
            f"rho_h is infinite at h = {h:.6g}: target region {report.witness.lower}.."
            f"{report.witness.upper} lies beyond the source support",
            report,
        )


def _sweep_bound(model: ShiftModel, h: float, seed: int) -> float | None:
    """General risk bound at h with rho_h(mu_n, pi^Q), or None when it does not apply."""
    rho = float(mixture_rho(model, [h], seed).values[0])
    if not math.isfinite(rho):
        logger.warning("rate_sweep_bound_skipped", n=model.n, h=h, reason="rho_h is infinite")
        return None
    try:
        return theoretical_upper_bound(model, h, rho, seed=seed).value
    except PreconditionError as exc:
        logger.warning("rate_sweep_bound_skipped", n=model.n, h=h, reason=str(exc))
        return None


def measured_alpha_rule(
    template: ShiftModel,
    n_list: Sequence[int],
    rule: BandwidthRule,
    vary: SweepBlock = "n_p",
    seed: int = 0,
    outer_n: int | None = None,
    inner_n: int | None = None,
) -> BandwidthRule:
    """The alpha rule with alpha set to the growth index of rho_h over the sweep.

    A composed alpha (transfer exponent plus target dimension) only bounds the
    growth of rho_h(mu_n, pi^Q) from above, and the bandwidths it selects
    oversmooth. Starting from ``rule.alpha``, each round fits log rho_h
    against log(1/h) on a geometric grid spanning the bandwidths the current
    alpha selects, then moves alpha to the fitted slope, never below d.

    Raises:
        BandwidthError: If ``rule`` is not an alpha rule.
    """
    if rule.rule != "alpha" or rule.alpha is None:
        raise BandwidthError("a measured alpha needs an alpha rule to start from")
    sizes = [_sizes(template, int(n), vary) for n in n_list]
    largest = template.with_sizes(*sizes[-1])
    dimension = template.dimension
    current = rule
    for round_index in range(ALPHA_FIT_ROUNDS):
        hs = [current.select(n_p, n_q, dimension) for n_p, n_q in sizes]
        grid = np.geomspace(max(hs), min(hs), ALPHA_FIT_POINTS)
        curve = mixture_rho(largest, grid, seed, outer_n, inner_n)
        fit = alpha_index_fit(curve, lower_half=False)
        alpha = max(fit.slope, float(dimension))
        logger.info(
            "measured_alpha_round",
            round=round_index,
            h_min=float(min(hs)),
            h_max=float(max(hs)),
            slope=fit.slope,
            alpha=alpha,
        )
        current = current.model_copy(update={"alpha": alpha})
    return current


def rate_sweep(
    template: ShiftModel,
    n_list: Sequence[int],
    rule: BandwidthRule,
    reps: int | None = None,
    seed: int = 0,
    vary: SweepBlock = "n_p",
    test_n: int | None = None,
) -> RateFit:
    """Generalization risk along a geometric sequence of sample sizes.

    Each row carries the risk bound at its bandwidth: the finite-state bound
    for the ``finite`` rule, whose bandwidth it also supplies, and the general
    bound with rho_h(mu_n, pi^Q) otherwise. The cell stays empty when a
    block is shorter than 1/gamma_ps.

    Args:
        template: Model whose block sizes are replaced at each n.
        n_list: Increasing sample sizes, at least four.
        rule: Bandwidth rule evaluated at each (n_P, n_Q).
        reps: Replications per point.
        seed: Root seed shared by every point.
        vary: Block that grows with n; ``both`` keeps the template's proportions.
        test_n: Test draws per replication for continuous targets.

    Raises:
        InsufficientDataError: With fewer than four sizes.
        ExplosionError: If some point has an infinite rho_h.
    """
    sizes = [int(n) for n in n_list]
    if len(sizes) < MIN_SWEEP_POINTS:
        raise InsufficientDataError(f"a sweep needs {MIN_SWEEP_POINTS} sample sizes, got {len(sizes)}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sample sizes must increase")
    ratios = np.diff(np.log(sizes))
    if np.ptp(ratios) > GEOMETRIC_TOLERANCE * ratios.mean():
        logger.warning("rate_sweep_not_geometric", sizes=sizes)

    rows = []
    for n in sizes:
        n_p, n_q = _sizes(template, n, vary)
        model = template.with_sizes(n_p, n_q)
        bound: float | None = None
        if rule.rule == "finite":
            finite = finite_upper_bound(model, rule.c)
            h, bound = finite.bandwidth, finite.value
        else:
            h = rule.select(n_p, n_q, model.dimension)
        check_finite_similarity(model, h)
        report = generalization_risk(model, h, test_n, reps, seed)
        if bound is None:
            bound = _sweep_bound(model, h, seed)
        rows.append(
            SweepRow(
                n=n,
                n_p=n_p,
                n_q=n_q,
                h=h,
                risk=report.empirical_risk,
                se=report.std_error,
                bound=bound,
            )
        )
        logger.info("rate_sweep_point_completed", n=n, h=h, risk=report.empirical_risk, bound=bound)

    fit = fit_rate(
        [row.n for row in rows],
        [row.risk for row in rows],
        expected_exponent(rule, template.dimension, vary, template.n_q),
    )
    return fit.model_copy(update={"rows": rows})
