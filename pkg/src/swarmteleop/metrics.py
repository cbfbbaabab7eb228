"""Evaluation statistics for interaction trials.

Covers the per-trial selection metrics (information transfer rate,
error-free accuracy, unit-interval deviation, per-alphabet agreement), the
interval estimators used on top of them (Wilson score, percentile
bootstrap), the chance-selection two-tailed p-value, and the
convergence-time binning used in trial reports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import norm

from .dictionary import ConfigString

__all__ = [
    "BIN_EDGES",
    "MetricSeries",
    "TrialInput",
    "TrialRecord",
    "alphabet_metrics",
    "bin_trials",
    "bootstrap_ci",
    "chance_pvalue",
    "dictionary_distance",
    "error_free_accuracy",
    "itr",
    "trial_from_dict",
    "trial_to_dict",
    "wilson_interval",
    "write_series_csv",
]

# Convergence-time bins, inclusive edges: short 1-12, medium 13-18, long 19-50.
BIN_EDGES = {"short": (1, 12), "medium": (13, 18), "long": (19, 50)}


@dataclass(frozen=True)
class TrialInput:
    """One interaction round inside a trial."""

    guess: int  # query index n(k) presented to the user
    x: int  # ideal reply
    y: int  # reply after the channel
    crossover: float  # generated crossover used at this input
    map_index: int  # MAP estimate after the update


@dataclass(frozen=True)
class TrialRecord:
    """One full interaction trace; the unit all metrics aggregate over."""

    target: int
    inputs: tuple[TrialInput, ...]
    estimate: int
    k_star: int
    converged: bool
    n_d: int
    seed_key: tuple[int, ...]
    algorithm: str = "posterior_matching"

    def __post_init__(self):
        if len(self.inputs) != self.k_star and len(self.inputs) < self.k_star:
            raise ValueError("per-input log shorter than k_star")

    def map_at(self, k: int) -> int:
        """Instantaneous MAP estimate after k inputs; holds after halting."""
        if k <= 0:
            return 1  # uniform prior ties break to the first index
        if k > len(self.inputs):
            return self.estimate
        return self.inputs[k - 1].map_index

    @property
    def correct(self) -> bool:
        return self.estimate == self.target


@dataclass(frozen=True)
class MetricSeries:
    """Per-input-count values with uncertainty bounds."""

    label: str
    inputs: tuple[int, ...]
    values: tuple[float, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        k = len(self.inputs)
        if not (len(self.values) == len(self.lo) == len(self.hi) == k):
            raise ValueError("series columns must align")
        for v, lo, hi in zip(self.values, self.lo, self.hi):
            if not lo - 1e-9 <= v <= hi + 1e-9:
                raise ValueError("bounds must bracket the point estimate")


def itr(p: float, n_d: int) -> float:
    """Information transfer rate in bits per trial.

    R = log2 N + P log2 P + (1-P) log2((1-P)/(N-1)), with 0 log 0 = 0 at
    the endpoints. Below-chance accuracies (possible in tiny samples) are
    computed as written rather than clipped; the formula bottoms out at
    exactly zero at P = 1/N and curves back up on either side.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("accuracy must lie in [0, 1]")
    if n_d < 2:
        raise ValueError("need at least two strings")
    r = math.log2(n_d)
    if p > 0.0:
        r += p * math.log2(p)
    if p < 1.0:
        r += (1.0 - p) * (math.log2(1.0 - p) - math.log2(n_d - 1))
    return r


def error_free_accuracy(
    trials: Sequence[TrialRecord], k: int, level: float = 0.95
) -> tuple[float, tuple[float, float]]:
    """Fraction of trials whose MAP estimate after k inputs hits the target."""
    if not trials:
        raise ValueError("no trials to aggregate")
    hits = sum(t.map_at(k) == t.target for t in trials)
    frac = hits / len(trials)
    return frac, wilson_interval(hits, len(trials), level=level)


def dictionary_distance(estimate: int, target: int, n_d: int) -> float:
    """Absolute deviation on the unit interval: |Z_estimate - Z_target|."""
    return abs(estimate - target) / n_d


def alphabet_metrics(
    estimate: ConfigString, target: ConfigString, b: int | None = None
) -> tuple[float, float, float]:
    """Per-character agreement statistics for two strings of one dictionary.

    Returns (accuracy, deviation, normalized deviation): the fraction of
    matching characters, the sum over alphabets of |difference|/b, and that
    sum divided by the alphabet count. ``b`` defaults to each alphabet's own
    size, which coincides with the uniform-alphabet definition on b^r
    dictionaries.
    """
    if estimate.spec != target.spec:
        raise ValueError("strings come from different dictionaries")
    sizes = estimate.spec.sizes
    r = len(sizes)
    acc = sum(a == t for a, t in zip(estimate.sigma, target.sigma)) / r
    dev = sum(
        abs(a - t) / (b if b is not None else n)
        for a, t, n in zip(estimate.sigma, target.sigma, sizes)
    )
    return acc, dev, dev / r


def wilson_interval(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("need at least one observation")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    z = float(norm.ppf(0.5 + level / 2.0))
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    margin = (z / denom) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    # the algebra pins the boundary cases exactly; don't let rounding drift them
    lo = 0.0 if successes == 0 else max(0.0, center - margin)
    hi = 1.0 if successes == n else min(1.0, center + margin)
    return lo, hi


def bootstrap_ci(
    samples: Sequence[float],
    statistic: Callable[[np.ndarray], np.ndarray] | None = None,
    resamples: int = 10_000,
    level: float = 0.95,
    seed=0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for a statistic of one sample.

    The default statistic is the mean, for which resampling is vectorized;
    a custom ``statistic`` must map a (resamples, n) matrix to a vector of
    resample values. Deterministic for a fixed seed.
    """
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("no samples to resample")
    rng = np.random.default_rng(seed)
    stats = np.empty(resamples)
    # chunked so the index matrix stays small at large resample counts
    chunk = max(1, min(resamples, int(2e7 // max(1, data.size))))
    done = 0
    while done < resamples:
        m = min(chunk, resamples - done)
        idx = rng.integers(0, data.size, size=(m, data.size))
        draws = data[idx]
        stats[done : done + m] = draws.mean(axis=1) if statistic is None else statistic(draws)
        done += m
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(stats, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def chance_pvalue(c: int, n: int = 150) -> float:
    """Two-tailed normal-approximation p-value against chance selection.

    p = 2 min(Phi(z), 1 - Phi(z)) with z = (c/n - 1/2) / sqrt(1/(4n)).
    """
    if not 0 <= c <= n:
        raise ValueError("correct count must lie in [0, n]")
    z = (c / n - 0.5) / math.sqrt(0.25 / n)
    cdf = norm.cdf(z)
    return 2.0 * min(cdf, 1.0 - cdf)


def bin_trials(trials: Iterable[TrialRecord]) -> dict[str, list[TrialRecord]]:
    """Group trials by convergence time; edges are inclusive.

    Every trial also lands in the "all" group.
    """
    groups: dict[str, list[TrialRecord]] = {name: [] for name in BIN_EDGES}
    groups["all"] = []
    for t in trials:
        groups["all"].append(t)
        for name, (lo, hi) in BIN_EDGES.items():
            if lo <= t.k_star <= hi or (name == "short" and t.k_star < 1):
                groups[name].append(t)
                break
    return groups


def trial_to_dict(t: TrialRecord) -> dict:
    """JSON-ready view of one trial (used by logs and trial files)."""
    return {
        "target": t.target,
        "estimate": t.estimate,
        "k_star": t.k_star,
        "converged": t.converged,
        "n_d": t.n_d,
        "seed_key": list(t.seed_key),
        "algorithm": t.algorithm,
        "inputs": [
            {
                "guess": i.guess,
                "x": i.x,
                "y": i.y,
                "crossover": i.crossover,
                "map_index": i.map_index,
            }
            for i in t.inputs
        ],
    }


def trial_from_dict(d: dict) -> TrialRecord:
    return TrialRecord(
        target=d["target"],
        inputs=tuple(
            TrialInput(
                guess=i["guess"],
                x=i["x"],
                y=i["y"],
                crossover=i["crossover"],
                map_index=i["map_index"],
            )
            for i in d["inputs"]
        ),
        estimate=d["estimate"],
        k_star=d["k_star"],
        converged=d["converged"],
        n_d=d["n_d"],
        seed_key=tuple(d["seed_key"]),
        algorithm=d.get("algorithm", "posterior_matching"),
    )


def write_series_csv(path, series: Iterable[MetricSeries]) -> None:
    """Write metric series as (inputs, value, lo, hi, series) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["inputs", "value", "lo", "hi", "series"])
        for s in series:
            for k, v, lo, hi in zip(s.inputs, s.values, s.lo, s.hi):
                writer.writerow([k, repr(float(v)), repr(float(lo)), repr(float(hi)), s.label])
