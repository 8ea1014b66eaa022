import itertools
import math

import numpy as np
import pytest

from netgoods.casestudy import (
    case2_pipeline,
    closed_form_delta_mean,
    closed_form_delta_sq_mean,
    closed_form_delta_var,
    coupling_residual,
    delta_row_stats,
    monte_carlo_case1,
    random_er_game,
    sigma_inf_bound,
)
from netgoods.equilibrium import verify_ne
from netgoods.errors import InputError


class TestRandomErGame:
    def test_zero_probability_identity(self):
        g = random_er_game(6, 0.0, 3.0, 1.0, 1.0, seed=1)
        assert np.array_equal(g.w, np.eye(6))

    def test_density_matches_probability(self):
        # p = p0/n = 0.02; 50*49 = 2450 Bernoulli draws per sample
        n, p0 = 50, 1.0
        count = 0
        trials = 40
        for s in range(trials):
            g = random_er_game(n, p0, 3.0, 1.0, 1.0, seed=1000 + s)
            count += int(g.w.sum() - n)
        total = trials * n * (n - 1)
        p_hat = count / total
        se = math.sqrt(0.02 * 0.98 / total)
        assert abs(p_hat - 0.02) < 5 * se

    def test_deterministic_per_seed(self):
        a = random_er_game(20, 1.5, 3.0, 1.0, 1.0, seed=42)
        b = random_er_game(20, 1.5, 3.0, 1.0, 1.0, seed=42)
        assert np.array_equal(a.w, b.w)
        c = random_er_game(20, 1.5, 3.0, 1.0, 1.0, seed=43)
        assert not np.array_equal(a.w, c.w)

    def test_box_top_is_dominated(self):
        g = random_er_game(5, 1.0, 3.0, 1.0, 1.0, seed=9)
        assert g.upper[0] == 2.5  # a/(2b) + 1
        # at the top of the box the own marginal value is zero but cost bites
        x = np.full(5, 2.5)
        from netgoods.game import pseudo_gradient

        assert np.all(pseudo_gradient(g, x) < 0)

    def test_invalid_probability(self):
        with pytest.raises(InputError):
            random_er_game(4, 8.0, 3.0, 1.0, 1.0, seed=0)


class TestDeltaRowStats:
    def test_identity(self):
        delta, inf_norm = delta_row_stats(np.eye(4))
        assert np.array_equal(delta, np.zeros(4))
        assert inf_norm == 0.0

    def test_hand_enumerated_three_player(self):
        # only in-edges 2->1 and 3->1: delta_1 = 2*2 + 0
        w = np.eye(3)
        w[1, 0] = 1.0
        w[2, 0] = 1.0
        delta, inf_norm = delta_row_stats(w)
        assert delta[0] == 4.0
        assert inf_norm == 4.0

    def test_formula_equals_matrix_inf_norm(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(2, 30))
            w = (rng.random((n, n)) < 0.15).astype(float)
            np.fill_diagonal(w, 1.0)
            delta, inf_norm = delta_row_stats(w)
            sigma = coupling_residual(w)
            assert np.allclose(delta, sigma.sum(axis=1))
            assert inf_norm == float(np.max(sigma.sum(axis=1)))

    def test_rejects_non_binary(self):
        w = np.eye(2)
        w[0, 1] = 0.5
        with pytest.raises(InputError, match="0/1"):
            delta_row_stats(w)


class TestClosedForms:
    @pytest.mark.parametrize("n", [3, 4])
    @pytest.mark.parametrize("p0_frac", [0.3, 0.8])
    def test_moments_by_exhaustive_enumeration(self, n, p0_frac):
        # weight every off-diagonal 0/1 matrix by its exact probability
        p = p0_frac * 1.0  # probability itself; p0 = p*n below
        off = [(i, j) for i in range(n) for j in range(n) if i != j]
        e1 = e2 = 0.0
        for bits in itertools.product([0, 1], repeat=len(off)):
            w = np.eye(n)
            for (i, j), bit in zip(off, bits):
                w[i, j] = bit
            k = sum(bits)
            weight = p**k * (1 - p) ** (len(off) - k)
            delta, _ = delta_row_stats(w)
            e1 += weight * delta[0]
            e2 += weight * float(delta[0] ** 2)
        p0 = p * n
        assert e1 == pytest.approx(closed_form_delta_mean(n, p0), abs=1e-12)
        assert e2 == pytest.approx(closed_form_delta_sq_mean(n, p0), abs=1e-10)
        var = e2 - e1**2
        assert var == pytest.approx(closed_form_delta_var(n, p0), abs=1e-10)

    def test_reference_values_n50(self):
        assert closed_form_delta_mean(50, 1.0) == pytest.approx(2.9008)
        assert sigma_inf_bound(50, 1.0) == pytest.approx(3.0 + math.sqrt(1100.0))
        assert sigma_inf_bound(50, 1.0) == pytest.approx(36.17, abs=0.01)

    def test_variance_below_dimension_free_bound(self):
        for n in (5, 20, 50, 200):
            for p0 in (0.3, 1.0, 2.0):
                assert closed_form_delta_var(n, p0) <= 4 * p0 + 5 * p0**2 + 2 * p0**3


@pytest.fixture(scope="module")
def report():
    return monte_carlo_case1(20, 1.0, 3.0, 1.0, 1.0, samples=400, seed=11)


class TestMonteCarloCase1:
    def test_moments_within_confidence(self, report):
        assert abs(report.emp_delta_mean - report.closed_delta_mean) <= 4 * report.se_delta_mean
        assert abs(report.emp_delta_var - report.closed_delta_var) <= 4 * report.se_delta_var

    def test_bound_fraction(self, report):
        assert report.frac_inf_norm_within >= 0.5
        assert 0.0 <= report.frac_certificate <= 1.0

    def test_replays_bit_identical(self):
        a = monte_carlo_case1(10, 1.0, 3.0, 1.0, 1.0, samples=100, seed=5)
        b = monte_carlo_case1(10, 1.0, 3.0, 1.0, 1.0, samples=100, seed=5)
        assert a.emp_delta_mean == b.emp_delta_mean
        assert np.array_equal(a.inf_norms, b.inf_norms)
        assert np.array_equal(a.sigma_maxes, b.sigma_maxes)
        assert a.sample_seeds == b.sample_seeds

    def test_sample_count_guard(self):
        with pytest.raises(InputError):
            monte_carlo_case1(10, 1.0, 3.0, 1.0, 1.0, samples=50, seed=5)


class TestCase2Pipeline:
    def test_two_player_full_density(self):
        rep = case2_pipeline(2, 3.0, 1.0, 1.0, density=1.0, seed=2, x_upper=1.5)
        assert np.allclose(rep.x_backward, [1 / 3, 1.0], atol=1e-9)
        assert rep.certificate.passed
        assert rep.certificate.margin > 0
        assert rep.mapped_ne_verified
        assert rep.solver_vs_backward < 1e-6
        assert rep.solver_vs_transformed < 1e-6
        assert rep.epsilon == pytest.approx(0.225)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_certificate_passes_for_small_n(self, n):
        rep = case2_pipeline(n, 3.0, 1.0, 1.0, density=1.0, seed=7, x_upper=1.5)
        assert rep.certificate.passed
        assert rep.certificate.margin > 0
        assert rep.solver_vs_backward < 1e-6
        assert rep.solver_vs_transformed < 1e-6
        third = float(np.max(np.abs(rep.x_backward - rep.x_transformed_back)))
        assert third < 1e-6  # all three routes agree pairwise

    def test_zero_density_identity(self):
        rep = case2_pipeline(3, 3.0, 1.0, 1.0, density=0.0, seed=3)
        assert np.array_equal(rep.w, np.eye(3))
        assert rep.certificate.passed
        # per-player optimum a/(2b + c0) = 1, inside the default box [0, 1.5]
        assert np.allclose(rep.x_backward, 1.0, atol=1e-10)

    def test_overflow_guard(self):
        with pytest.raises(InputError, match="overflow"):
            case2_pipeline(14, 3.0, 1.0, 1.0, density=1.0, seed=1)

    def test_end_to_end_ne_is_real(self):
        rep = case2_pipeline(4, 3.0, 1.0, 1.0, density=0.6, seed=8)
        from netgoods.functions import QuadraticClippedValue, QuadraticCost
        from netgoods.game import Game

        game = Game(
            w=rep.w, lower=np.zeros(4), upper=np.full(4, 1.5),
            values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(4)),
            costs=tuple(QuadraticCost(c0=1.0) for _ in range(4)),
        )
        assert verify_ne(game, rep.x_backward, 1e-8)[0]
