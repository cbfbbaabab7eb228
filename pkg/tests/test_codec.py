"""Posterior codec tests.

Two independent oracles anchor these: a cumulative-sum re-derivation of
the guess-selection quantities, and a direct Bayes-rule posterior for the
symmetric channel (likelihood p or q per side of the query boundary).
"""

import numpy as np
import pytest

from swarmteleop.codec import (
    PosteriorState,
    StoppingRule,
    check_stopped,
    correct_input,
    init_posterior,
    map_estimate,
    select_guess,
    stepwise_init,
    stepwise_update,
    update_posterior,
)


def bayes_update(alpha, n, y, p):
    """Oracle: explicit Bayes rule for the two-sided channel likelihood."""
    q = 1.0 - p
    like = np.empty_like(alpha)
    for j in range(len(alpha)):
        x = 1 if (j + 1) >= n else 0  # ideal reply if j+1 were the target
        like[j] = q if y == x else p
    post = like * alpha
    return post / post.sum()


def guess_oracle(alpha):
    """Oracle: median index and adjustment probability from raw sums."""
    total = np.cumsum(alpha)
    n_med = next(i + 1 for i, c in enumerate(total) if c >= 0.5 - 1e-9)
    head = alpha[: n_med - 1].sum()
    at = alpha[:n_med].sum()
    nu1 = (1 - head) - head
    nu2 = at - (1 - at)
    return n_med, nu1, nu2


class TestInit:
    def test_uniform_60(self):
        state = init_posterior(60, 0.1, seed=0)
        assert np.allclose(state.alpha, 1 / 60)
        assert state.k == 0

    def test_uniform_2(self):
        assert np.array_equal(init_posterior(2, 0.0, seed=0).alpha, [0.5, 0.5])

    @pytest.mark.parametrize("n_d", [2, 7, 60, 500])
    def test_normalized(self, n_d):
        state = init_posterior(n_d, 0.3, seed=1)
        assert state.alpha.sum() == pytest.approx(1.0, abs=1e-12)
        state.check()

    def test_bad_crossover(self):
        with pytest.raises(ValueError):
            init_posterior(60, 0.5, seed=0)
        with pytest.raises(ValueError):
            init_posterior(60, -0.01, seed=0)


class TestSelectGuess:
    def test_uniform_60_guesses_center(self):
        state = init_posterior(60, 0.1, seed=0)
        out = select_guess(state)
        n_med, nu1, nu2 = guess_oracle(state.alpha)
        assert out.median == n_med == 30
        assert nu1 == pytest.approx(2 / 60)
        assert nu2 == pytest.approx(0.0, abs=1e-12)
        assert out.pi1 == pytest.approx(0.0, abs=1e-12)
        assert out.n == 31  # lands on Z = 0.5 deterministically

    def test_uniform_2(self):
        state = init_posterior(2, 0.1, seed=0)
        out = select_guess(state)
        assert out.median == 1
        assert out.n == 2

    def test_point_mass_draws_between_1_and_2(self):
        counts = {1: 0, 2: 0}
        for seed in range(400):
            state = init_posterior(3, 0.1, seed=seed)
            state.alpha[:] = [1.0, 0.0, 0.0]
            out = select_guess(state)
            assert out.pi1 == pytest.approx(0.5)
            counts[out.n] += 1
        # pi1 = 1/2: both outcomes appear
        assert counts[1] > 100 and counts[2] > 100

    def test_median_at_end_is_pinned(self):
        state = init_posterior(4, 0.1, seed=0)
        state.alpha[:] = [0.0, 0.0, 0.1, 0.9]
        out = select_guess(state)
        assert out.median == 4
        assert out.n == 4
        assert out.pi1 == 1.0

    def test_first_guess_balances_mass(self):
        # |mass below n - mass at/above n| <= 1/N_d from a uniform prior
        for n_d in (2, 9, 60, 81, 100):
            state = init_posterior(n_d, 0.1, seed=3)
            out = select_guess(state)
            below = (out.n - 1) / n_d
            assert abs(below - (1 - below)) <= 1 / n_d + 1e-12


class TestCorrectInput:
    def test_target_before_guess(self):
        assert correct_input(10, 31) == 0

    def test_tie_means_right(self):
        assert correct_input(31, 31) == 1

    def test_all_pairs_match_unit_comparison(self):
        for target in range(1, 61):
            for guess in range(1, 61):
                zt, zn = (target - 1) / 60, (guess - 1) / 60
                assert correct_input(target, guess) == (1 if zt >= zn else 0)


class TestUpdatePosterior:
    def test_two_string_example_y1(self):
        state = init_posterior(2, 0.1, seed=0)
        update_posterior(state, n=2, y=1)
        assert np.allclose(state.alpha, [0.1, 0.9], atol=1e-12)
        assert state.k == 1

    def test_two_string_example_y0(self):
        state = init_posterior(2, 0.1, seed=0)
        update_posterior(state, n=2, y=0)
        assert np.allclose(state.alpha, [0.9, 0.1], atol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.2, 0.3, 0.4])
    @pytest.mark.parametrize("y", [0, 1])
    def test_bayes_oracle_n2(self, p, y):
        state = init_posterior(2, p, seed=0)
        update_posterior(state, n=2, y=y)
        oracle = bayes_update(np.array([0.5, 0.5]), n=2, y=y, p=p)
        assert np.allclose(state.alpha, oracle, atol=1e-12)

    def test_bayes_oracle_general(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n_d = int(rng.integers(2, 40))
            alpha = rng.dirichlet(np.ones(n_d))
            n = int(rng.integers(1, n_d + 1))
            y = int(rng.integers(0, 2))
            p = float(rng.uniform(0.01, 0.45))
            state = init_posterior(n_d, p, seed=0)
            state.alpha[:] = alpha
            update_posterior(state, n, y)
            assert np.allclose(state.alpha, bayes_update(alpha, n, y, p), atol=1e-12)

    def test_noiseless_zeroes_contradicted_side(self):
        state = init_posterior(10, 0.0, seed=0)
        update_posterior(state, n=4, y=1)
        assert np.all(state.alpha[:3] == 0.0)
        assert state.alpha.sum() == pytest.approx(1.0, abs=1e-12)

    def test_normalization_preserved_over_long_runs(self):
        rng = np.random.default_rng(11)
        state = init_posterior(60, 0.2, seed=5)
        for _ in range(500):
            n = int(rng.integers(1, 61))
            update_posterior(state, n, int(rng.integers(0, 2)))
            state.check()

    def test_bad_reply_rejected(self):
        state = init_posterior(4, 0.1, seed=0)
        with pytest.raises(ValueError):
            update_posterior(state, 2, 2)


class TestMapAndStopping:
    def test_simple_argmax(self):
        state = init_posterior(2, 0.1, seed=0)
        state.alpha[:] = [0.1, 0.9]
        assert map_estimate(state) == 2

    def test_tie_breaks_low(self):
        state = init_posterior(60, 0.1, seed=0)
        assert map_estimate(state) == 1

    def test_threshold_stop(self):
        state = init_posterior(3, 0.1, seed=0)
        state.alpha[:] = [0.02, 0.96, 0.02]
        res = check_stopped(state, StoppingRule(tau=0.95))
        assert res is not None and res.converged
        assert res.j_star == 2

    def test_timeout_returns_map(self):
        state = init_posterior(3, 0.1, seed=0)
        state.alpha[:] = [0.2, 0.5, 0.3]
        state.k = 50
        res = check_stopped(state, StoppingRule(tau=1.0, max_inputs=50))
        assert res is not None and not res.converged
        assert res.j_star == 2

    def test_not_stopped(self):
        state = init_posterior(3, 0.1, seed=0)
        assert check_stopped(state, StoppingRule(tau=0.95)) is None

    def test_noiseless_trial_converges_fast(self):
        # seeded end-to-end: noiseless replies, tau = 0.95
        for target in (1, 17, 42, 60):
            state = init_posterior(60, 0.05, seed=target)
            rule = StoppingRule(tau=0.95, max_inputs=50)
            res = None
            while res is None:
                g = select_guess(state)
                update_posterior(state, g.n, correct_input(target, g.n))
                res = check_stopped(state, rule)
            assert res.converged and res.j_star == target
            assert res.k_star <= 10


class TestNoiselessIdentifiability:
    def test_map_hits_every_target_within_20_inputs(self):
        for target in range(1, 61):
            state = init_posterior(60, 0.25, seed=1000 + target)
            for _ in range(20):
                g = select_guess(state)
                update_posterior(state, g.n, correct_input(target, g.n))
            assert map_estimate(state) == target


class TestStepwise:
    def test_init_rounding(self):
        assert stepwise_init(60) == 30
        assert stepwise_init(9) == 5  # 4.5 rounds half-up
        assert stepwise_init(2) == 1

    def test_init_against_nearest_even_divergence(self):
        # round-half-up by construction; bankers' rounding would give 4 at 9
        assert stepwise_init(9) != round(9 / 2)

    def test_clamping(self):
        assert stepwise_update(1, 0, 60) == 1
        assert stepwise_update(60, 1, 60) == 60

    def test_simple_moves(self):
        assert stepwise_update(30, 1, 60) == 31
        assert stepwise_update(30, 0, 60) == 29

    def test_trajectory_steps_by_one(self):
        rng = np.random.default_rng(3)
        n = stepwise_init(60)
        for _ in range(200):
            new = stepwise_update(n, int(rng.integers(0, 2)), 60)
            assert abs(new - n) <= 1
            if 1 < n < 60:
                assert abs(new - n) == 1
            n = new
