"""Bandwidth-dependent similarity between source and target laws.

Exact and Monte Carlo rho_h, closed-form ball probabilities, alpha-family
evidence, kernel transfer exponents and support-based explosion detection.
"""

from src.similarity.balls import (
    UnsupportedDescriptorError,
    ball_prob_closed_form,
    covering_bound,
    kernel_ball,
    law_ball,
    rho_self_upper,
)
from src.similarity.explosion import ExplosionError, ExplosionReport, explosion_check
from src.similarity.families import (
    AlphaFamilyCheck,
    AlphaFit,
    AlphaMembership,
    InsufficientDataError,
    alpha_family_check,
    alpha_index_fit,
    holder_embedding_alpha,
    product_beta_membership,
)
from src.similarity.rho import (
    GridMismatchError,
    RhoCurve,
    SimilarityEstimate,
    finite_sampler,
    geometric_grid,
    law_sampler,
    rho_exact_curve,
    rho_exact_finite,
    rho_mc,
    rho_mc_curve,
    rho_mixture,
    rho_uniform_closed_form,
    stationary_sampler,
)
from src.similarity.transfer import (
    TransferExponentCheck,
    TransferParameters,
    beta_chain_transfer,
    bounded_ratio_transfer,
    product_beta_transfer,
    transfer_to_alpha,
    verify_transfer_exponent,
)

__all__ = [
    "AlphaFamilyCheck",
    "AlphaFit",
    "AlphaMembership",
    "ExplosionError",
    "ExplosionReport",
    "GridMismatchError",
    "InsufficientDataError",
    "RhoCurve",
    "SimilarityEstimate",
    "TransferExponentCheck",
    "TransferParameters",
    "UnsupportedDescriptorError",
    "alpha_family_check",
    "alpha_index_fit",
    "ball_prob_closed_form",
    "beta_chain_transfer",
    "bounded_ratio_transfer",
    "covering_bound",
    "explosion_check",
    "finite_sampler",
    "geometric_grid",
    "holder_embedding_alpha",
    "kernel_ball",
    "law_ball",
    "law_sampler",
    "product_beta_membership",
    "product_beta_transfer",
    "rho_exact_curve",
    "rho_exact_finite",
    "rho_mc",
    "rho_mc_curve",
    "rho_mixture",
    "rho_self_upper",
    "rho_uniform_closed_form",
    "stationary_sampler",
    "transfer_to_alpha",
    "verify_transfer_exponent",
]
