"""Risk estimation, explicit upper bounds and empirical rates.

Monte Carlo generalization risk and prediction error of the uniform-kernel
estimator under a (P, Q) covariate shift model, the explicit bounds they are
checked against, and log-log rate fits over sample-size sweeps.
"""

from src.risk.bounds import (
    AlphaRateBound,
    BoundTerms,
    FiniteBound,
    PreconditionError,
    alpha_rate_bound,
    bound_constant,
    finite_constant,
    finite_upper_bound,
    mixture_rho,
    mixture_rho_bound,
    target_second_moment,
    theoretical_upper_bound,
)
from src.risk.generalization import RiskReport, generalization_risk
from src.risk.model import BlockConstants, ShiftModel, block_constants, training_paths
from src.risk.prediction import (
    DecayTable,
    PredictionReport,
    gap_vs_generalization,
    prediction_envelope,
    prediction_error,
    transition_multiplier,
)
from src.risk.rates import RateFit, SweepRow, fit_rate, measured_alpha_rule, rate_sweep

__all__ = [
    "AlphaRateBound",
    "BlockConstants",
    "BoundTerms",
    "DecayTable",
    "FiniteBound",
    "PreconditionError",
    "PredictionReport",
    "RateFit",
    "RiskReport",
    "ShiftModel",
    "SweepRow",
    "alpha_rate_bound",
    "block_constants",
    "bound_constant",
    "finite_constant",
    "finite_upper_bound",
    "fit_rate",
    "gap_vs_generalization",
    "generalization_risk",
    "measured_alpha_rule",
    "mixture_rho",
    "mixture_rho_bound",
    "prediction_envelope",
    "prediction_error",
    "rate_sweep",
    "target_second_moment",
    "theoretical_upper_bound",
    "training_paths",
    "transition_multiplier",
]
