"""Tests for rho_h, ball probabilities, alpha families, transfer exponents and explosion."""

import math

import numpy as np
import pytest

from src.chains.continuous import BetaChain
from src.chains.distributions import BetaDistribution, BetaStep, ProductBeta, UniformBox
from src.chains.finite import FiniteKernel, stationary_finite
from src.chains.metric import Box, Metric
from src.similarity.balls import (
    UnsupportedDescriptorError,
    ball_prob_closed_form,
    covering_bound,
    kernel_ball,
    law_ball,
    rho_self_upper,
)
from src.similarity.explosion import explosion_check
from src.similarity.families import (
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
    beta_chain_transfer,
    bounded_ratio_transfer,
    product_beta_transfer,
    transfer_to_alpha,
    verify_transfer_exponent,
)

UNIT = UniformBox()
SQUARE = UniformBox(lower=[0.0, 0.0], upper=[1.0, 1.0])
SEGMENT = UniformBox(lower=[0.0, 0.0], upper=[1.0, 0.0])


def closed_form_curve(grid: np.ndarray) -> RhoCurve:
    return RhoCurve.from_values(grid, [rho_uniform_closed_form(h) for h in grid])


# rho_exact_finite


def test_rho_exact_uniform_small_bandwidth():
    """Test that uniform laws on K separated states give rho = K."""
    coords = np.linspace(0, 1, 4)[:, None]
    uniform = np.full(4, 0.25)

    estimate = rho_exact_finite(uniform, uniform, coords, 0.1)

    assert estimate.value == pytest.approx(4.0, rel=1e-12)
    assert estimate.method == "exact"
    assert estimate.std_error == 0.0
    assert not estimate.explosion_flag


def test_rho_exact_large_bandwidth_is_one():
    """Test that balls covering the whole space give rho = 1."""
    coords = np.linspace(0, 1, 5)[:, None]
    mu = np.array([0.1, 0.2, 0.3, 0.2, 0.2])
    q = np.array([0.3, 0.1, 0.1, 0.1, 0.4])

    assert rho_exact_finite(mu, q, coords, 1.0).value == pytest.approx(1.0)


def test_rho_exact_two_state_example():
    """Test the two-state example 0.5/0.25 + 0.5/0.75 = 8/3."""
    estimate = rho_exact_finite([0.25, 0.75], [0.5, 0.5], [[0.0], [1.0]], 0.5)

    assert estimate.value == pytest.approx(8 / 3, rel=1e-12)


def test_rho_exact_zero_mass_ball_explodes():
    """Test that a target atom without source mass nearby gives +inf with a witness."""
    estimate = rho_exact_finite([1.0, 0.0], [0.5, 0.5], [[0.0], [1.0]], 0.1)

    assert math.isinf(estimate.value)
    assert estimate.explosion_flag
    assert estimate.witness == [1.0]
    assert estimate.zero_cells == 1


def test_rho_exact_curve_nonincreasing_in_h():
    """Test that rho_h grows as the bandwidth shrinks."""
    rng = np.random.default_rng(3)
    coords = rng.random((8, 2))
    mu = rng.dirichlet(np.ones(8))
    q = rng.dirichlet(np.ones(8))
    grid = geometric_grid(1.0, 20, 200)

    values = rho_exact_curve(mu, q, coords, grid).values

    assert np.all(values >= 1.0)
    assert np.all(np.diff(values) >= -1e-12)


def test_rho_self_upper_dominates_exact_self_similarity():
    """Test rho_h(pi, pi) <= (1 + 4D/h)^d for finite chains in the unit square."""
    rng = np.random.default_rng(11)
    for _ in range(10):
        weights = rng.random((6, 6)) + 0.05
        kernel = FiniteKernel.from_matrix(
            weights / weights.sum(axis=1, keepdims=True), states=rng.random((6, 2))
        )
        pi = stationary_finite(kernel)
        for h in geometric_grid(1.0, 10, 100):
            exact = rho_exact_finite(pi, pi, kernel.coords, h).value
            assert exact <= rho_self_upper(h, 1.0, 2)


def test_similarity_estimate_rejects_values_below_one():
    """Test that rho_h < 1 cannot be recorded."""
    with pytest.raises(ValueError, match="at least 1"):
        SimilarityEstimate(h=0.1, value=0.5, method="exact")


def test_rho_exact_rejects_non_probability_vectors():
    """Test that the mixture must sum to one."""
    with pytest.raises(ValueError, match="probability vector"):
        rho_exact_finite([0.5, 0.6], [0.5, 0.5], [[0.0], [1.0]], 0.1)


# Monte Carlo


def test_rho_mc_uniform_matches_closed_form():
    """Test the uniform/uniform estimate at h = 0.25 against 1 + 2 ln 2."""
    estimate = rho_mc(law_sampler(UNIT), law_sampler(UNIT), 0.25, outer_n=4000, inner_n=50000, seed=7)

    expected = 1.0 + 2.0 * math.log(2.0)
    assert rho_uniform_closed_form(0.25) == pytest.approx(expected)
    assert estimate.method == "monte-carlo"
    assert estimate.std_error > 0
    assert abs(estimate.value - expected) <= 4 * estimate.std_error
    assert estimate.outer_budget == 4000
    assert estimate.inner_budget == 50000


def test_rho_mc_matches_exact_for_finite_laws():
    """Test that Monte Carlo on finite samplers agrees with the exact sum."""
    kernel = FiniteKernel.from_matrix([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]])
    pi = stationary_finite(kernel)
    q = np.array([0.2, 0.3, 0.5])
    exact = rho_exact_finite(pi, q, kernel.coords, 0.1).value

    estimate = rho_mc(
        finite_sampler(kernel.coords, pi),
        finite_sampler(kernel.coords, q),
        0.1,
        outer_n=4000,
        inner_n=200000,
        seed=5,
    )

    assert abs(estimate.value - exact) <= 4 * estimate.std_error


def random_finite_pair(seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stationary laws of two random chains on K <= 20 shared points of the unit square."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 21))
    coords = rng.random((k, 2))
    laws = []
    for _ in range(2):
        weights = rng.random((k, k)) + 0.05
        kernel = FiniteKernel.from_matrix(weights / weights.sum(axis=1, keepdims=True), states=coords)
        laws.append(stationary_finite(kernel))
    return laws[0], laws[1], coords


def brute_force_rho(mu: np.ndarray, q: np.ndarray, coords: np.ndarray, h: float) -> float:
    total = 0.0
    for j in range(len(q)):
        mass = 0.0
        for i in range(len(mu)):
            if max(abs(coords[i, 0] - coords[j, 0]), abs(coords[i, 1] - coords[j, 1])) <= h:
                mass += mu[i]
        total += q[j] / mass
    return total


def test_rho_exact_matches_brute_force_on_random_chains():
    """Test the exact sum against a double loop on 50 random finite chains."""
    for seed in range(50):
        mu, q, coords = random_finite_pair(seed)

        exact = rho_exact_finite(mu, q, coords, 0.3).value

        assert exact == pytest.approx(brute_force_rho(mu, q, coords, 0.3), abs=1e-12, rel=0)


def test_rho_mc_covers_exact_value_on_random_chains():
    """Test that rho_mc lands within 4 standard errors in at least 95% of 50 random chains."""
    hits = 0
    for seed in range(50):
        mu, q, coords = random_finite_pair(seed)
        exact = rho_exact_finite(mu, q, coords, 0.3).value

        estimate = rho_mc(
            finite_sampler(coords, mu),
            finite_sampler(coords, q),
            0.3,
            outer_n=10_000,
            inner_n=10_000,
            seed=seed,
        )

        assert estimate.std_error > 0
        hits += abs(estimate.value - exact) <= 4 * estimate.std_error

    assert hits >= 48


def test_rho_mc_uniform_consistent_across_seeds():
    """Test that 95 of 100 seeded uniform/uniform runs cover 1 + 2 ln 2 within 4 SE."""
    expected = rho_uniform_closed_form(0.25)
    hits = 0
    for seed in range(100):
        estimate = rho_mc(
            law_sampler(UNIT), law_sampler(UNIT), 0.25, outer_n=10_000, inner_n=10_000, seed=seed
        )
        hits += abs(estimate.value - expected) <= 4 * estimate.std_error

    assert hits >= 95


def test_rho_mc_standard_error_includes_inner_draws():
    """Test that a single target atom still gets a positive standard error."""
    coords = np.array([[0.0], [1.0]])

    estimate = rho_mc(
        finite_sampler(coords, [0.3, 0.7]),
        finite_sampler(coords, [1.0, 0.0]),
        0.5,
        outer_n=1000,
        inner_n=10_000,
        seed=4,
    )

    # every outer term is identical, so only the inner draws contribute
    p = 0.3
    assert estimate.std_error == pytest.approx(math.sqrt((1 - p) / (10_000 * p)) / p, rel=0.5)
    assert abs(estimate.value - 1 / p) <= 4 * estimate.std_error


def test_rho_mc_flags_explosion_for_higher_dimensional_target():
    """Test that a source on a segment cannot cover a target on the square."""
    estimate = rho_mc(law_sampler(SEGMENT), law_sampler(SQUARE), 0.05, outer_n=200, inner_n=1000, seed=1)

    assert math.isinf(estimate.value)
    assert estimate.explosion_flag
    assert estimate.zero_cells > 0
    assert estimate.witness is not None
    assert estimate.witness[1] > 0.05


def test_rho_mc_curve_is_reproducible():
    """Test that the same seed yields the same curve."""
    grid = geometric_grid(1.0, 5, 10)
    first = rho_mc_curve(law_sampler(UNIT), law_sampler(UNIT), grid, 300, 2000, seed=9)
    second = rho_mc_curve(law_sampler(UNIT), law_sampler(UNIT), grid, 300, 2000, seed=9)

    np.testing.assert_array_equal(first.values, second.values)
    assert first.rows()[0][0] == pytest.approx(1.0)


def test_rho_mc_rejects_empty_budgets():
    """Test that budgets must be positive."""
    with pytest.raises(ValueError, match="at least 1"):
        rho_mc(law_sampler(UNIT), law_sampler(UNIT), 0.1, outer_n=-1, inner_n=10)


# rho_mixture


def test_rho_mixture_without_target_block_returns_source_curve():
    """Test that n_Q = 0 returns rho_P exactly."""
    grid = [1.0, 0.5, 0.1]
    curve_p = RhoCurve.from_values(grid, [1.0, 3.0, 7.0])
    curve_q = RhoCurve.from_values(grid, [1.0, 2.0, 5.0])

    bound = rho_mixture(10, 0, curve_p, curve_q)

    np.testing.assert_array_equal(bound.values, curve_p.values)
    assert bound.estimates[0].method == "mixture-bound"


def test_rho_mixture_absorbs_infinite_source_curve():
    """Test that an infinite rho_P leaves (n/n_Q) rho_Q."""
    grid = [1.0, 0.5]
    curve_p = RhoCurve.from_values(grid, [math.inf, math.inf])
    curve_q = RhoCurve.from_values(grid, [1.0, 2.0])

    bound = rho_mixture(30, 10, curve_p, curve_q)

    np.testing.assert_allclose(bound.values, [4.0, 8.0])
    assert not any(e.explosion_flag for e in bound.estimates)


def test_rho_mixture_balanced_blocks():
    """Test n_P = n_Q with rho_P = 4 and rho_Q = 8 gives 8."""
    curve_p = RhoCurve.from_values([0.2], [4.0])
    curve_q = RhoCurve.from_values([0.2], [8.0])

    assert rho_mixture(50, 50, curve_p, curve_q).values[0] == pytest.approx(8.0)


def test_rho_mixture_rejects_mismatched_grids():
    """Test that curves on different grids are refused."""
    with pytest.raises(GridMismatchError):
        rho_mixture(
            1, 1, RhoCurve.from_values([1.0, 0.5], [1, 2]), RhoCurve.from_values([1.0, 0.4], [1, 2])
        )


# balls and covering


def test_covering_bound_examples():
    """Test (1 + 2D/eps)^d on two substitutions."""
    assert covering_bound(1.0, 2.0, 3) == pytest.approx(8.0)
    assert covering_bound(1.0, 0.5, 1) == pytest.approx(5.0)


def test_ball_prob_minorizing_beta_at_origin():
    """Test nu^P(B(0, h)) = h^(2 + gamma_P) for Beta(2 + gamma_P, 1)."""
    gamma_p = 0.7
    h = np.array([0.05, 0.3, 0.9])

    mass = ball_prob_closed_form(BetaDistribution(shape=2 + gamma_p), np.zeros(3), h)

    np.testing.assert_allclose(mass, h ** (2 + gamma_p))


def test_ball_prob_uniform_interval():
    """Test that the uniform law gives the ball length."""
    assert float(ball_prob_closed_form(UNIT, 0.5, 0.2)) == pytest.approx(0.4)
    assert float(ball_prob_closed_form(UNIT, 0.0, 0.2)) == pytest.approx(0.2)


def test_ball_prob_beta_step_matches_monte_carlo():
    """Test the beta one-step ball probability against 10^5 draws."""
    law = BetaStep(gamma=0.5, state=0.3)
    draws = law.sample(np.random.default_rng(2), 100_000)[:, 0]
    x, h = 0.4, 0.1
    frequency = float(np.mean(np.abs(draws - x) <= h))
    se = math.sqrt(frequency * (1 - frequency) / draws.size)

    closed = float(ball_prob_closed_form(law, x, h))

    assert closed == pytest.approx((x + h) ** 1.8 - (x - h) ** 1.8)
    assert abs(closed - frequency) <= 4 * se


def test_ball_prob_product_beta_padded_coordinates():
    """Test that padded coordinates act as a point mass at zero."""
    law = ProductBeta(shapes=[1.0], ambient_dimension=2)

    on_face = ball_prob_closed_form(law, [0.5, 0.05], 0.1)
    off_face = ball_prob_closed_form(law, [0.5, 0.3], 0.1)

    assert float(on_face) == pytest.approx(0.2)
    assert float(off_face) == 0.0


def test_ball_prob_uniform_box_with_degenerate_side():
    """Test a uniform law on a segment embedded in the square."""
    assert float(ball_prob_closed_form(SEGMENT, [0.5, 0.0], 0.25)) == pytest.approx(0.5)


def test_ball_prob_rejects_euclidean_metric():
    """Test that the Euclidean metric has no closed form."""
    with pytest.raises(UnsupportedDescriptorError, match="sup-norm"):
        ball_prob_closed_form(UNIT, 0.5, 0.1, metric=Metric.EUCLIDEAN)


# alpha families


def test_alpha_family_exact_power_law_passes_at_constant():
    """Test that rho_h = C (D/h)^alpha attains sup = C and passes."""
    grid = geometric_grid(2.0, 15, 100)
    curve = RhoCurve.from_values(grid, 3.0 * (2.0 / grid) ** 1.5)

    check = alpha_family_check(curve, alpha=1.5, constant=3.0, diameter=2.0)

    assert check.sup_value == pytest.approx(3.0)
    assert check.passed
    assert check.witness_h is None


def test_alpha_family_uniform_curve():
    """Test that the uniform pair passes alpha = 1 with C = 3 but fails alpha = 0.5."""
    curve = closed_form_curve(geometric_grid(1.0, 20, 1000))

    assert alpha_family_check(curve, alpha=1.0, constant=3.0).passed
    failing = alpha_family_check(curve, alpha=0.5, constant=3.0)
    assert not failing.passed
    assert failing.witness_h == pytest.approx(1e-3)


def test_alpha_family_infinite_entry_fails_with_witness():
    """Test that an infinite rho_h fails automatically."""
    curve = RhoCurve.from_values([1.0, 0.5, 0.25], [1.0, 2.0, math.inf])

    check = alpha_family_check(curve, alpha=5.0, constant=100.0)

    assert not check.passed
    assert check.witness_h == 0.25


def test_alpha_family_primed_variant_checks_self_similarity():
    """Test that the primed family also bounds rho_h(Q, Q)."""
    grid = geometric_grid(1.0, 10, 100)
    cross = RhoCurve.from_values(grid, grid**-0.5)
    self_curve = RhoCurve.from_values(grid, grid**-2.0)

    assert alpha_family_check(cross, 0.5, 1.0, alpha_prime=2.0, self_curve=self_curve).passed
    check = alpha_family_check(cross, 0.5, 1.0, alpha_prime=1.0, self_curve=self_curve)
    assert not check.passed
    assert check.sup_value_prime == pytest.approx(100.0)
    with pytest.raises(ValueError, match="rho_h\\(Q, Q\\)"):
        alpha_family_check(cross, 0.5, 1.0, alpha_prime=1.0)


def test_alpha_family_rejects_grid_beyond_diameter():
    """Test that bandwidths above D are refused."""
    with pytest.raises(ValueError, match="\\(0, D\\]"):
        alpha_family_check(RhoCurve.from_values([2.0, 1.0], [1.0, 1.0]), 1.0, 1.0)


def test_alpha_index_fit_exact_power_law():
    """Test that rho = h^-2 gives slope 2."""
    grid = geometric_grid(1.0, 20, 200)

    fit = alpha_index_fit(RhoCurve.from_values(grid, grid**-2.0))

    assert fit.slope == pytest.approx(2.0, abs=1e-9)
    assert fit.points == 10


def test_alpha_index_fit_uniform_square():
    """Test that the uniform law on the square has index close to 2."""
    grid = geometric_grid(1.0, 20, 200)
    values = [rho_uniform_closed_form(h) ** 2 for h in grid]

    fit = alpha_index_fit(RhoCurve.from_values(grid, values))

    assert fit.slope == pytest.approx(2.0, abs=0.1)


def test_alpha_index_fit_embedded_segment_monte_carlo():
    """Test that a target on a segment of the square has self-similarity index close to 1."""
    grid = np.geomspace(0.05, 0.005, 8)
    curve = rho_mc_curve(law_sampler(SEGMENT), law_sampler(SEGMENT), grid, 1000, 50000, seed=4)

    fit = alpha_index_fit(curve, lower_half=False)

    assert fit.slope == pytest.approx(1.0, abs=0.1)


def test_alpha_index_fit_needs_three_finite_points():
    """Test that infinite entries do not count towards the fit."""
    curve = RhoCurve.from_values([1.0, 0.5, 0.25, 0.1], [1.0, 2.0, math.inf, math.inf])

    with pytest.raises(InsufficientDataError):
        alpha_index_fit(curve, lower_half=False)


def test_holder_embedding_cases():
    """Test both branches of the Holder embedding index."""
    assert holder_embedding_alpha(3, 1, 1.0, 1.0) == (2.0, 3.0)
    assert holder_embedding_alpha(3, 1, 1.0, 0.5) == (2.0, 4.0)
    assert holder_embedding_alpha(3, 2, 1.0, 0.5) == (1.0, 4.0)


def test_product_beta_membership_matches_transfer_route():
    """Test that the product-beta membership follows from its transfer exponent."""
    membership = product_beta_membership([0.5, 0.5], [0.5], 0.5)
    transfer = product_beta_transfer([0.5, 0.5], [0.5], 0.5)

    derived, _ = transfer_to_alpha(transfer.gamma, 1, 1.0, transfer.constant, 0.5**2, 2)

    assert membership.alpha == pytest.approx(1.75)
    assert membership.constant == pytest.approx(24.0)
    assert membership.family == "D-prime"
    assert derived.alpha == pytest.approx(membership.alpha)
    assert derived.constant == pytest.approx(membership.constant)
    assert derived.alpha_prime == 1.0


# transfer exponents


def beta_grids() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.linspace(0, 1, 50), np.linspace(0, 1, 50), geometric_grid(1.0, 50, 1000)


def test_beta_chain_transfer_exponent_passes():
    """Test the analytic beta-chain exponent on a 50^3 grid."""
    source, target = BetaChain(gamma=1.0), BetaChain(gamma=0.0)
    params = beta_chain_transfer(1.0, 0.0)
    xs, ys, hs = beta_grids()

    check = verify_transfer_exponent(
        law_ball(source.minorizing_measure()), kernel_ball(target), *params, xs, ys, hs
    )

    assert params.gamma == 2.0
    assert params.constant == 0.5
    assert check.passed
    assert check.worst_margin >= -1e-12
    assert check.grid_sizes == (50, 50, 50)


def test_beta_chain_smaller_exponent_fails_at_origin():
    """Test that gamma - 0.2 fails with witnesses at x = y = 0."""
    source, target = BetaChain(gamma=1.0), BetaChain(gamma=0.0)
    gamma, constant, radius = beta_chain_transfer(1.0, 0.0)
    xs, ys, hs = beta_grids()

    check = verify_transfer_exponent(
        law_ball(source.minorizing_measure()), kernel_ball(target), gamma - 0.2, constant, radius, xs, ys, hs
    )

    assert not check.passed
    assert check.witness.x == [0.0]
    assert check.witness.y == [0.0]
    assert check.worst_ratio < 1
    assert check.relative_witness is not None
    assert check.relative_witness.x == [0.0]
    assert check.relative_witness.h == pytest.approx(hs.min())


def test_transfer_identity_has_zero_margin():
    """Test that Q-step law equal to nu^P with gamma = 0 and C = 1 has margin 0."""
    nu = law_ball(BetaDistribution(shape=2.5))
    xs, ys, hs = beta_grids()

    check = verify_transfer_exponent(nu, lambda y, x, h: nu(x, h), 0.0, 1.0, 1.0, xs, ys[:3], hs)

    assert check.worst_margin == 0.0
    assert check.passed


def test_transfer_rejects_bandwidths_above_radius():
    """Test that h must not exceed h_bar."""
    nu = law_ball(UNIT)
    with pytest.raises(ValueError, match="h_bar"):
        verify_transfer_exponent(nu, lambda y, x, h: nu(x, h), 0.0, 1.0, 0.5, [0.5], [0.5], [0.6])


def test_transfer_to_alpha_full_dimensional_target():
    """Test gamma = 0, d_Q = d, k_Q = 1, C = eps_P = 1 gives alpha = d and C' = 3^d."""
    membership, fallback = transfer_to_alpha(0.0, 3, 1.0, 1.0, 1.0, 3)

    assert membership.alpha == 3.0
    assert membership.constant == pytest.approx(27.0)
    assert membership.family == "D"
    assert fallback.alpha == 3.0
    assert fallback.constant == pytest.approx(9.0**3)


def test_transfer_to_alpha_fallback_formula():
    """Test the always-valid fallback (gamma + d, 9^d / (C eps_P))."""
    _, fallback = transfer_to_alpha(0.5, 1, 2.0, 0.25, 0.5, 2)

    assert fallback.alpha == pytest.approx(2.5)
    assert fallback.constant == pytest.approx(81.0 / 0.125)


def test_bounded_ratio_transfer():
    """Test that a density ratio bound gives exponent 0 and constant 1/C."""
    assert bounded_ratio_transfer(4.0) == (0.0, 0.25, 1.0)


def test_beta_chain_memberships_hold_on_monte_carlo_curve():
    """Test that the transfer-derived family passes on a Monte Carlo rho curve."""
    source, target = BetaChain(gamma=1.0), BetaChain(gamma=0.0)
    params = beta_chain_transfer(1.0, 0.0)
    epsilon_p = source.doeblin().epsilon
    membership, _ = transfer_to_alpha(params.gamma, 1, 1.0, params.constant, epsilon_p, 1)
    grid = geometric_grid(1.0, 10, 10)

    curve = rho_mc_curve(
        stationary_sampler(source, burn_in=200),
        stationary_sampler(target, burn_in=200),
        grid,
        outer_n=2000,
        inner_n=100_000,
        seed=21,
    )
    check = alpha_family_check(curve, membership.alpha, 1.1 * membership.constant)

    assert membership.alpha == pytest.approx(3.0)
    assert check.passed


# explosion


def test_explosion_segment_source_square_target():
    """Test the witness [0,1] x [0.2,1] for a segment source and a square target."""
    report = explosion_check(Box.unit(1, 2), Box.unit(2), 0.1)

    assert report.exploded
    assert report.coordinate == 1
    assert report.witness == Box(lower=[0.0, 0.2], upper=[1.0, 1.0])


def test_explosion_same_support_is_finite():
    """Test that equal supports never explode."""
    assert not explosion_check(SQUARE, SQUARE, 0.01).exploded


def test_explosion_lower_dimensional_target_is_finite():
    """Test that a segment target inside a square source never explodes."""
    for h in (0.5, 0.1, 0.001):
        assert not explosion_check(Box.unit(2), Box.unit(1, 2), h).exploded

    estimate = rho_mc(law_sampler(SQUARE), law_sampler(SEGMENT), 0.2, outer_n=500, inner_n=20000, seed=3)
    assert math.isfinite(estimate.value)


def test_explosion_degenerate_target_off_source():
    """Test that a target on a far horizontal line explodes."""
    target = UniformBox(lower=[0.0, 0.5], upper=[1.0, 0.5])

    report = explosion_check(SEGMENT, target, 0.1)

    assert report.exploded
    assert report.witness == Box(lower=[0.0, 0.5], upper=[1.0, 0.5])


def test_explosion_accepts_kernels_and_rejects_unknown_supports():
    """Test that kernels resolve to their support and other objects are refused."""
    assert not explosion_check(BetaChain(gamma=1.0), BetaChain(gamma=0.0), 0.05).exploded
    with pytest.raises(UnsupportedDescriptorError):
        explosion_check("ball", Box.unit(1), 0.1)  # type: ignore[arg-type]
