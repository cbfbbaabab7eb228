"""Metric formula and estimator tests."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from swarmteleop.dictionary import decode_index, swarm_dictionary, synthetic_dictionary
from swarmteleop.metrics import (
    MetricSeries,
    TrialInput,
    TrialRecord,
    alphabet_metrics,
    bin_trials,
    bootstrap_ci,
    chance_pvalue,
    dictionary_distance,
    error_free_accuracy,
    itr,
    trial_from_dict,
    trial_to_dict,
    wilson_interval,
    write_series_csv,
)


def make_trial(target, estimate, k_star, converged=True, n_d=60, maps=None):
    maps = maps if maps is not None else [estimate] * k_star
    inputs = tuple(
        TrialInput(guess=1, x=1, y=1, crossover=0.1, map_index=m) for m in maps
    )
    return TrialRecord(
        target=target,
        inputs=inputs,
        estimate=estimate,
        k_star=k_star,
        converged=converged,
        n_d=n_d,
        seed_key=(0, target),
    )


class TestItr:
    def test_perfect_selection(self):
        assert itr(1.0, 60) == pytest.approx(math.log2(60), abs=1e-12)

    def test_chance_is_zero(self):
        for n_d in (2, 9, 60, 81, 729):
            assert itr(1.0 / n_d, n_d) == pytest.approx(0.0, abs=1e-12)

    def test_reference_value(self):
        # independent high-precision evaluation of the formula at P=1/2, N=81
        p, n_d = 0.5, 81
        expected = math.log2(n_d) + p * math.log2(p) + (1 - p) * math.log2((1 - p) / (n_d - 1))
        assert expected == pytest.approx(2.1789, abs=5e-5)
        assert itr(p, n_d) == pytest.approx(expected, abs=1e-12)

    def test_identities_across_sizes(self):
        for n_d in (2, 10, 100, 1000, 10_000, 100_000, 1_000_000):
            assert itr(1.0, n_d) == pytest.approx(math.log2(n_d), abs=1e-12)
            assert itr(1.0 / n_d, n_d) == pytest.approx(0.0, abs=1e-12)

    def test_continuity_on_valid_range(self):
        n_d = 60
        grid = np.linspace(1 / n_d, 1.0, 2000)
        vals = np.array([itr(float(p), n_d) for p in grid])
        assert np.all(np.isfinite(vals))
        assert np.max(np.abs(np.diff(vals))) < 0.02

    def test_below_chance_computed_as_written(self):
        # the formula dips to exactly zero at chance and rises again below
        # it; below-chance accuracies are evaluated as written, not clipped
        p, n_d = 0.001, 60
        expected = math.log2(n_d) + p * math.log2(p) + (1 - p) * math.log2((1 - p) / (n_d - 1))
        assert itr(p, n_d) == pytest.approx(expected, abs=1e-12)
        assert itr(p, n_d) > itr(1 / n_d, n_d)

    def test_zero_accuracy_endpoint(self):
        assert itr(0.0, 60) == pytest.approx(math.log2(60) - math.log2(59), abs=1e-12)


class TestErrorFreeAccuracy:
    def test_all_correct(self):
        trials = [make_trial(t, t, 5) for t in range(1, 11)]
        frac, (lo, hi) = error_free_accuracy(trials, k=5)
        assert frac == 1.0 and hi == 1.0

    def test_counts_fixture(self):
        trials = [make_trial(1, 1, 4), make_trial(2, 5, 4), make_trial(3, 3, 4)]
        frac, _ = error_free_accuracy(trials, k=4)
        assert frac == pytest.approx(2 / 3)

    def test_estimate_holds_after_halt(self):
        t = make_trial(7, 7, 3, maps=[1, 4, 7])
        assert t.map_at(2) == 4
        assert t.map_at(3) == 7
        assert t.map_at(40) == 7

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            error_free_accuracy([], k=1)

    def test_chance_floor_monte_carlo(self):
        rng = np.random.default_rng(123)
        n = 10_000
        draws = rng.integers(1, 61, size=n)
        targets = rng.integers(1, 61, size=n)
        acc = float(np.mean(draws == targets))
        assert acc == pytest.approx(1 / 60, abs=0.005)


class TestDictionaryDistance:
    def test_zero_at_match(self):
        assert dictionary_distance(13, 13, 60) == 0.0

    def test_half_interval(self):
        assert dictionary_distance(31, 1, 60) == pytest.approx(0.5)

    def test_maximum(self):
        assert dictionary_distance(60, 1, 60) == pytest.approx(59 / 60)


class TestAlphabetMetrics:
    def test_identical(self):
        spec = swarm_dictionary()
        s = decode_index(17, spec)
        assert alphabet_metrics(s, s) == (1.0, 0.0, 0.0)

    def test_one_character_off(self):
        spec = swarm_dictionary()
        a = decode_index(1, spec)
        b = decode_index(2, spec)  # differs only in the last character
        acc, dev, ndev = alphabet_metrics(a, b)
        assert acc == pytest.approx(0.75)
        assert dev == pytest.approx(1 / 2)  # last alphabet has size 2
        assert ndev == pytest.approx(1 / 8)

    def test_uniform_alphabet_normalization_bounds(self):
        spec = synthetic_dictionary(3, 2)
        strings = [decode_index(j, spec) for j in range(1, spec.size + 1)]
        for a in strings:
            for b in strings:
                acc, dev, ndev = alphabet_metrics(a, b, b=3)
                assert 0.0 <= ndev <= 1.0
                assert dev == pytest.approx(ndev * 2)

    def test_accuracy_one_iff_distance_zero(self):
        spec = synthetic_dictionary(3, 4)  # N_d = 81
        strings = [decode_index(j, spec) for j in range(1, spec.size + 1)]
        for a in strings:
            for b in strings:
                acc, _, _ = alphabet_metrics(a, b)
                dist = dictionary_distance(a.index, b.index, spec.size)
                assert (acc == 1.0) == (dist == 0.0)


class TestWilson:
    def test_zero_successes_floor(self):
        lo, hi = wilson_interval(0, 10)
        assert lo == 0.0 and hi > 0.0

    def test_full_successes_ceiling(self):
        lo, hi = wilson_interval(10, 10)
        assert hi == 1.0 and lo < 1.0

    def test_seventy_of_seventy(self):
        lo, _ = wilson_interval(70, 70)
        # closed form: lo = 1 / (1 + z^2/n) at phat = 1
        z = norm.ppf(0.975)
        assert lo == pytest.approx(1.0 / (1.0 + z * z / 70), abs=1e-12)
        assert lo == pytest.approx(0.948, abs=1e-3)

    def test_contains_point_estimate(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 400))
            s = int(rng.integers(0, n + 1))
            lo, hi = wilson_interval(s, n)
            assert 0.0 <= lo <= s / n <= hi <= 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            wilson_interval(0, 0)


class TestBootstrap:
    def test_constant_samples_collapse(self):
        lo, hi = bootstrap_ci([0.4] * 50, resamples=500, seed=0)
        assert lo == hi == pytest.approx(0.4)

    def test_two_point_sample_brackets_mean(self):
        rng = np.random.default_rng(1)
        data = rng.integers(0, 2, size=1000).astype(float)
        lo, hi = bootstrap_ci(data, resamples=4000, seed=2)
        assert lo < data.mean() < hi
        # analytic binomial CI width comparison: ~ +-1.96 sqrt(p q / n)
        half = 1.96 * math.sqrt(0.25 / 1000)
        assert (hi - lo) / 2 == pytest.approx(half, rel=0.2)

    def test_deterministic_under_seed(self):
        data = np.random.default_rng(5).normal(size=300)
        a = bootstrap_ci(data, resamples=2000, seed=99)
        b = bootstrap_ci(data, resamples=2000, seed=99)
        assert a == b

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            bootstrap_ci([])


class TestChancePvalue:
    def test_center_is_one(self):
        assert chance_pvalue(75, 150) == pytest.approx(1.0)

    def test_extreme_tail(self):
        assert chance_pvalue(150, 150) < 1e-30

    def test_symmetry(self):
        for c in range(0, 151, 5):
            assert chance_pvalue(c, 150) == pytest.approx(chance_pvalue(150 - c, 150))

    def test_matches_direct_formula(self):
        c, n = 100, 150
        z = (c / n - 0.5) / math.sqrt(0.25 / n)
        expected = 2 * min(norm.cdf(z), 1 - norm.cdf(z))
        assert chance_pvalue(c, n) == pytest.approx(expected, abs=1e-15)


class TestBins:
    @pytest.mark.parametrize(
        "k_star,expected",
        [(1, "short"), (12, "short"), (13, "medium"), (18, "medium"), (19, "long"), (50, "long")],
    )
    def test_edges(self, k_star, expected):
        groups = bin_trials([make_trial(1, 1, k_star)])
        assert [t.k_star for t in groups[expected]] == [k_star]

    def test_partition(self):
        trials = [make_trial(1, 1, k) for k in range(1, 51)]
        groups = bin_trials(trials)
        member = [len(groups["short"]), len(groups["medium"]), len(groups["long"])]
        assert sum(member) == 50
        assert len(groups["all"]) == 50


class TestSerialization:
    def test_trial_roundtrip(self):
        t = make_trial(4, 9, 3, converged=False, maps=[2, 5, 9])
        assert trial_from_dict(trial_to_dict(t)) == t

    def test_series_csv_layout(self, tmp_path):
        series = MetricSeries(
            label="demo", inputs=(1, 2), values=(0.5, 0.6), lo=(0.4, 0.5), hi=(0.6, 0.7)
        )
        path = tmp_path / "series.csv"
        write_series_csv(path, [series])
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "inputs,value,lo,hi,series"
        assert lines[1].split(",") == ["1", "0.5", "0.4", "0.6", "demo"]
