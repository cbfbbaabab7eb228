"""Figure rendering for the CLI report path.

The harness only emits delimited data; everything matplotlib lives here.
Each function takes already-computed results and writes one PNG next to
the corresponding CSV.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .channel import CrossoverSamples, PchipProfile
from .harness import ThresholdTable
from .metrics import MetricSeries, TrialRecord

__all__ = [
    "plot_bin_report",
    "plot_crossover_profile",
    "plot_input_histogram",
    "plot_metric_series",
    "plot_threshold_table",
]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_metric_series(series: Sequence[MetricSeries], path, title: str | None = None):
    """One panel per metric, one line per series, shaded uncertainty."""
    by_metric: dict[str, list[MetricSeries]] = defaultdict(list)
    for s in series:
        label, _, metric = s.label.rpartition("|")
        by_metric[metric or s.label].append(s)

    n = len(by_metric)
    fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.4), squeeze=False)
    for ax, (metric, group) in zip(axes[0], sorted(by_metric.items())):
        for s in group:
            label = s.label.rpartition("|")[0] or s.label
            ax.plot(s.inputs, s.values, label=label, linewidth=1.3)
            ax.fill_between(s.inputs, s.lo, s.hi, alpha=0.2)
        ax.set_xlabel("inputs")
        ax.set_ylabel(metric.replace("_", " "))
        if len(group) > 1:
            ax.legend(fontsize=6)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def plot_crossover_profile(
    profile: PchipProfile, path, samples: CrossoverSamples | None = None, max_inputs: int = 50
):
    """Generated-crossover curve with its knots and optional raw samples."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    if samples is not None:
        ax.plot(samples.inputs, samples.rates, ".", ms=4, alpha=0.6, label="empirical")
    ks = np.arange(1, max_inputs + 1)
    ax.plot(ks, [profile.crossover(int(k)) for k in ks], "-", label="profile")
    ax.plot(profile.knots_x, np.clip(profile.knots_y, 0, 0.5), "*", ms=10, label="knots")
    ax.axhline(0.5, color="gray", linewidth=0.6, linestyle=":")
    ax.set_xlabel("inputs")
    ax.set_ylabel("crossover probability")
    ax.set_ylim(0, 0.55)
    ax.legend(fontsize=7)
    return _finish(fig, path)


def plot_threshold_table(table: ThresholdTable, path):
    """Heatmap of chosen thresholds; infeasible cells hatched."""
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(table.budgets), 4))
    im = ax.imshow(table.taus, aspect="auto", vmin=0, vmax=1, cmap="viridis")
    ax.set_xticks(range(len(table.budgets)), [str(b) for b in table.budgets])
    ax.set_yticks(range(len(table.crossovers)), [f"{p:.2f}" for p in table.crossovers])
    ax.set_xlabel("input budget")
    ax.set_ylabel("crossover")
    for i in range(len(table.crossovers)):
        for j in range(len(table.budgets)):
            mark = "" if table.feasible[i, j] else "!"
            ax.text(j, i, f"{table.taus[i, j]:.2f}{mark}", ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, label="tau")
    return _finish(fig, path)


def plot_bin_report(rows: Iterable[dict], path):
    """Per-bin convergence accuracy with interval whiskers."""
    rows = [r for r in rows if r["n"]]
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    xs = np.arange(len(rows))
    accs = [r["accuracy"] for r in rows]
    err_lo = [r["accuracy"] - r["lo"] for r in rows]
    err_hi = [r["hi"] - r["accuracy"] for r in rows]
    ax.bar(xs, accs, width=0.6, alpha=0.8)
    ax.errorbar(xs, accs, yerr=[err_lo, err_hi], fmt="none", ecolor="black", capsize=4)
    ax.set_xticks(xs, [r["bin"] for r in rows])
    ax.set_ylabel("configuration accuracy")
    ax.set_ylim(0, 1.05)
    return _finish(fig, path)


def plot_input_histogram(trials: Sequence[TrialRecord], path, max_inputs: int = 50):
    """Distribution of inputs-to-convergence; timeouts pile at the cap."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.hist([t.k_star for t in trials], bins=np.arange(0.5, max_inputs + 1.5, 1.0))
    ax.set_xlabel("inputs until convergence")
    ax.set_ylabel("trials")
    return _finish(fig, path)
