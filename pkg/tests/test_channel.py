"""Channel model tests: corruption statistics, cubic fits, profile shape."""

import numpy as np
import pytest

from swarmteleop.channel import (
    CrossoverSamples,
    FixedProfile,
    PchipProfile,
    build_pchip,
    corrupt,
    default_crossover_samples,
    default_nonstationary_profile,
    fit_cubic,
    load_crossover_samples,
    parse_profile_arg,
)


class TestCorrupt:
    def test_noiseless_passthrough(self):
        rng = np.random.default_rng(0)
        profile = FixedProfile(0.0)
        for k in range(1, 100):
            x = k % 2
            assert corrupt(x, k, profile, rng) == x

    def test_pure_noise_limit(self):
        rng = np.random.default_rng(1)
        profile = FixedProfile(0.5)
        agree = sum(corrupt(1, k, profile, rng) == 1 for k in range(10_000))
        assert agree / 10_000 == pytest.approx(0.5, abs=0.02)

    def test_empirical_flip_rate_at_reported_value(self):
        rng = np.random.default_rng(2)
        profile = FixedProfile(0.218)
        flips = sum(corrupt(0, k, profile, rng) for k in range(100_000))
        assert flips / 100_000 == pytest.approx(0.218, abs=0.01)

    def test_reproducible_under_seed(self):
        profile = FixedProfile(0.3)
        xs = [int(b) for b in np.random.default_rng(9).integers(0, 2, 200)]
        rng_a, rng_b = np.random.default_rng(42), np.random.default_rng(42)
        ys_a = [corrupt(x, k + 1, profile, rng_a) for k, x in enumerate(xs)]
        ys_b = [corrupt(x, k + 1, profile, rng_b) for k, x in enumerate(xs)]
        assert ys_a == ys_b

    def test_bad_input_rejected(self):
        with pytest.raises(ValueError):
            corrupt(2, 1, FixedProfile(0.1), np.random.default_rng(0))

    def test_flip_frequency_tracks_profile_per_index(self):
        profile = default_nonstationary_profile()
        rng = np.random.default_rng(3)
        n = 10_000
        for k in (1, 10, 25, 50):
            p = profile.crossover(k)
            flips = sum(corrupt(0, k, profile, rng) for _ in range(n))
            se = max(np.sqrt(p * (1 - p) / n), 1e-4)
            assert abs(flips / n - p) <= 3 * se


class TestFitCubic:
    def test_exact_interpolation(self):
        coeffs = [0.2, -0.01, 5e-4, -4e-6]
        xs = np.arange(1, 51)
        ys = np.polynomial.polynomial.polyval(xs, coeffs)
        fit = fit_cubic(CrossoverSamples(tuple(xs), tuple(ys), tuple([1] * 50)))
        assert np.allclose(fit.coef, coeffs, atol=1e-8)

    def test_constant_samples(self):
        xs = np.arange(1, 21)
        fit = fit_cubic(CrossoverSamples(tuple(xs), tuple([0.3] * 20), tuple([1] * 20)))
        assert fit.coef[0] == pytest.approx(0.3, abs=1e-8)
        assert np.allclose(fit.coef[1:], 0.0, atol=1e-8)

    def test_noisy_recovery_of_ground_truth(self):
        rng = np.random.default_rng(5)
        coeffs = np.array([0.18, -0.012, 8e-4, -8e-6])
        xs = np.arange(1, 51, dtype=float)
        truth = np.polynomial.polynomial.polyval(xs, coeffs)
        ys = np.clip(truth + rng.normal(0, 0.004, xs.size), 0, 1)
        fit = fit_cubic(CrossoverSamples(tuple(int(x) for x in xs), tuple(ys), tuple([70] * 50)))
        recovered = fit(xs)
        assert np.max(np.abs(recovered - truth)) < 0.02

    def test_weighted_mode_prefers_heavy_points(self):
        xs = tuple(range(1, 9))
        ys = (0.1, 0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 0.9)
        heavy_low = CrossoverSamples(xs, ys, (1000, 1000, 1000, 1000, 1, 1, 1, 1))
        w = fit_cubic(heavy_low, weighted=True)
        u = fit_cubic(heavy_low, weighted=False)
        assert abs(w(2.0) - 0.1) < abs(u(2.0) - 0.1)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_cubic(CrossoverSamples((1, 2, 3), (0.1, 0.2, 0.3), (1, 1, 1)))


def fatigue_cubic():
    """| shape: dip near input 7, peak near input 40, falling after."""
    # roots of derivative at 7 and 40: p'(x) = 3a(x-7)(x-40)
    a = -6e-6
    b = -1.5 * a * 47
    c = 3 * a * 280
    # choose d so the dip sits near 0.13
    poly = np.polynomial.Polynomial([0.0, c, b, a])
    d = 0.13 - poly(7.0)
    return np.polynomial.Polynomial([d, c, b, a])


class TestBuildPchip:
    def test_knot_interpolation(self):
        cubic = fatigue_cubic()
        profile = build_pchip(cubic, max_inputs=50)
        assert not profile.degenerate
        for x, y in zip(profile.knots_x, profile.knots_y):
            assert profile.crossover(int(round(x))) == pytest.approx(
                min(max(y, 0.0), 0.5), abs=5e-3
            )
        # exact at the knots when queried continuously
        assert profile._interp(profile.knots_x[1]) == pytest.approx(profile.knots_y[1])

    def test_clamped_beyond_maximum(self):
        cubic = fatigue_cubic()
        profile = build_pchip(cubic, max_inputs=50)
        vmax = profile.crossover(50)
        x_max = profile.knots_x[2]
        for k in range(int(np.ceil(x_max)), 56):
            assert profile.crossover(k) == pytest.approx(vmax, abs=1e-9)

    def test_monotone_after_minimum(self):
        cubic = fatigue_cubic()
        profile = build_pchip(cubic, max_inputs=50)
        x_min = profile.knots_x[1]
        grid = np.linspace(x_min, 50, 1000)
        values = np.clip(profile._interp(grid), 0, 0.5)
        assert np.all(np.diff(values) >= -1e-12)

    def test_integer_grid_nondecreasing_between_min_and_max(self):
        profile = default_nonstationary_profile()
        x_min = profile.knots_x[1]
        vals = [profile.crossover(k) for k in range(int(np.ceil(x_min)), 51)]
        assert all(b - a >= -1e-12 for a, b in zip(vals, vals[1:]))

    def test_bounds_respected(self):
        profile = default_nonstationary_profile()
        grid = [profile.crossover(k) for k in range(1, 51)]
        dense = np.clip(profile._interp(np.linspace(1, 50, 1000)), -1, 1)
        assert min(grid) >= 0.0 and max(grid) <= 0.5
        assert dense.min() >= -1e-12 and dense.max() <= 0.5 + 1e-12

    def test_degenerate_cubic_falls_back(self):
        line = np.polynomial.Polynomial([0.1, 0.004, 0.0, 0.0])
        profile = build_pchip(line, max_inputs=50)
        assert profile.degenerate
        assert profile.crossover(1) == pytest.approx(line(1.0))
        assert profile.crossover(50) == pytest.approx(line(50.0))


class TestDefaultProfileData:
    def test_bundled_samples_shape(self):
        samples = default_crossover_samples()
        assert len(samples.inputs) >= 40
        assert samples.inputs[0] == 1
        assert max(samples.counts) == 70  # full trial count early on
        assert all(0 <= r <= 1 for r in samples.rates)

    def test_counts_decline_after_convergences_begin(self):
        samples = default_crossover_samples()
        by_input = dict(zip(samples.inputs, samples.counts))
        assert by_input[1] == by_input[8] == 70
        assert by_input[50] < by_input[8]

    def test_average_error_near_reported_value(self):
        # count-weighted mean of the digitized curve sits near 21.8%
        samples = default_crossover_samples()
        w = np.asarray(samples.counts, dtype=float)
        mean = float(np.asarray(samples.rates) @ w / w.sum())
        assert mean == pytest.approx(0.218, abs=0.02)

    def test_roundtrip_file_loading(self, tmp_path):
        path = tmp_path / "knots.csv"
        path.write_text("# input,rate,count\n1,0.2,70\n2,0.18,70\n3,0.15,70\n4,0.14,60\n")
        samples = load_crossover_samples(path)
        assert samples.inputs == (1, 2, 3, 4)
        assert samples.rates[1] == pytest.approx(0.18)
        assert samples.counts == (70, 70, 70, 60)


class TestProfileArgs:
    def test_fixed(self):
        profile = parse_profile_arg("fixed:0.218")
        assert isinstance(profile, FixedProfile)
        assert profile.p == 0.218

    def test_pchip_default(self):
        assert isinstance(parse_profile_arg("pchip:default"), PchipProfile)

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            parse_profile_arg("gauss:0.1")
