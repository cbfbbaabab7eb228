"""Batch experiment driver.

Runs simulated-user trials against a dictionary and error profile,
generates the stopping-threshold lookup table, and sweeps synthetic
dictionary sizes, emitting metric series ready for CSV export. Every run
is reproducible from its master seed: trial i uses the generator spawned
at key (seed, i), so results do not depend on execution order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import codec
from .channel import ErrorProfile, FixedProfile, corrupt
from .dictionary import DictionarySpec, decode_index, synthetic_dictionary
from .metrics import (
    MetricSeries,
    TrialInput,
    TrialRecord,
    alphabet_metrics,
    bin_trials,
    bootstrap_ci,
    itr,
    trial_to_dict,
    wilson_interval,
)

__all__ = [
    "ExperimentConfig",
    "ThresholdTable",
    "bin_report_rows",
    "generate_threshold_table",
    "lookup_threshold",
    "run_trial",
    "run_trials",
    "sweep_dictionaries",
    "sweep_series",
    "write_threshold_table_csv",
    "write_trials_jsonl",
]

ALGORITHMS = ("posterior_matching", "stepwise")

# A posterior cannot assume exactly chance crossover; table rows at p = 0.5
# run with the assumed value capped just below it (the update is then a
# no-op, which is the correct no-information behavior).
_ASSUMED_P_CAP = 0.5 - 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """One batch of trials; stopping=None means sweep mode (no stopping)."""

    spec: DictionarySpec
    algorithm: str = "posterior_matching"
    assumed_p: float = 0.1
    profile: ErrorProfile = field(default_factory=lambda: FixedProfile(0.1))
    stopping: Optional[codec.StoppingRule] = None
    max_inputs: int = 50
    n_trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.n_trials < 1:
            raise ValueError("need at least one trial")
        if self.stopping is not None and self.stopping.max_inputs != self.max_inputs:
            raise ValueError("stopping rule cap must match max_inputs")


def run_trial(
    n_d: int,
    algorithm: str,
    assumed_p: float,
    profile: ErrorProfile,
    stopping: Optional[codec.StoppingRule],
    max_inputs: int,
    rng: np.random.Generator,
    seed_key: tuple[int, ...],
    target: Optional[int] = None,
) -> TrialRecord:
    """Simulate one trial; the target defaults to a uniform draw from rng.

    The trial touches the dictionary only through its size, so equal-sized
    dictionaries produce identical traces under the same seed.
    """
    if target is None:
        target = int(rng.integers(1, n_d + 1))
    state = codec.init_posterior(n_d, min(assumed_p, _ASSUMED_P_CAP), rng)
    step_guess = codec.stepwise_init(n_d) if algorithm == "stepwise" else None

    inputs: list[TrialInput] = []
    outcome: Optional[codec.StopResult] = None
    while outcome is None:
        if algorithm == "stepwise":
            n = step_guess
        else:
            n = codec.select_guess(state).n
        k_next = state.k + 1
        x = codec.correct_input(target, n)
        y = corrupt(x, k_next, profile, rng)
        codec.update_posterior(state, n, y)
        inputs.append(
            TrialInput(
                guess=n,
                x=x,
                y=y,
                crossover=profile.crossover(k_next),
                map_index=codec.map_estimate(state),
            )
        )
        if algorithm == "stepwise":
            step_guess = codec.stepwise_update(n, y, n_d)
        if stopping is not None:
            outcome = codec.check_stopped(state, stopping)
        elif state.k >= max_inputs:
            outcome = codec.StopResult(
                j_star=codec.map_estimate(state), k_star=state.k, converged=False
            )

    return TrialRecord(
        target=target,
        inputs=tuple(inputs),
        estimate=outcome.j_star,
        k_star=outcome.k_star,
        converged=outcome.converged,
        n_d=n_d,
        seed_key=seed_key,
        algorithm=algorithm,
    )


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    """Run the configured batch with per-trial spawned seeds."""
    n_d = config.spec.size
    children = np.random.SeedSequence(config.seed).spawn(config.n_trials)
    records = []
    for i, child in enumerate(children):
        records.append(
            run_trial(
                n_d=n_d,
                algorithm=config.algorithm,
                assumed_p=config.assumed_p,
                profile=config.profile,
                stopping=config.stopping,
                max_inputs=config.max_inputs,
                rng=np.random.default_rng(child),
                seed_key=(config.seed, i),
            )
        )
    return records


# ---------------------------------------------------------------------------
# Threshold lookup table


@dataclass(frozen=True)
class ThresholdTable:
    """Best stopping threshold per (crossover row, input-budget column)."""

    crossovers: tuple[float, ...]
    budgets: tuple[int, ...]
    taus: np.ndarray  # (rows, cols)
    feasible: np.ndarray  # (rows, cols) bool; False = no tau met the budget
    accuracies: np.ndarray  # accuracy achieved by the chosen tau
    mean_inputs: np.ndarray


def _candidate_taus() -> np.ndarray:
    return np.round(np.arange(0, 21) * 0.05, 2)


def generate_threshold_table(
    crossovers: Sequence[float] = tuple(np.round(np.arange(0, 11) * 0.05, 2)),
    budgets: Sequence[int] = (25,),
    trials_per_cell: int = 500,
    n_d: int = 60,
    max_inputs: int = 50,
    seed: int = 0,
) -> ThresholdTable:
    """Search the tau grid per crossover row by simulation.

    For each crossover the generated error equals the assumed error. Each
    cell keeps the tau with the highest convergence accuracy among those
    whose mean input count fits the budget; accuracy ties go to the larger
    tau. If nothing fits the budget the accuracy maximizer is kept and the
    cell is flagged infeasible.
    """
    taus = _candidate_taus()
    rows, cols = len(crossovers), len(budgets)
    out_tau = np.zeros((rows, cols))
    out_feas = np.zeros((rows, cols), dtype=bool)
    out_acc = np.zeros((rows, cols))
    out_mean = np.zeros((rows, cols))

    for pi, p in enumerate(crossovers):
        per_tau: list[tuple[float, float]] = []  # (accuracy, mean inputs)
        for ti, tau in enumerate(taus):
            ss = np.random.SeedSequence(entropy=(seed, pi, ti))
            children = ss.spawn(trials_per_cell)
            correct = 0
            used = 0
            rule = codec.StoppingRule(tau=float(tau), max_inputs=max_inputs)
            for i, child in enumerate(children):
                rec = run_trial(
                    n_d=n_d,
                    algorithm="posterior_matching",
                    assumed_p=float(p),
                    profile=FixedProfile(float(p)),
                    stopping=rule,
                    max_inputs=max_inputs,
                    rng=np.random.default_rng(child),
                    seed_key=(seed, pi, ti, i),
                )
                correct += rec.estimate == rec.target
                used += rec.k_star
            per_tau.append((correct / trials_per_cell, used / trials_per_cell))

        for bi, budget in enumerate(budgets):
            best = None  # (accuracy, tau, mean, feasible)
            for tau, (acc, mean) in zip(taus, per_tau):
                if mean <= budget and (
                    best is None
                    or acc > best[0]
                    or (acc == best[0] and tau > best[1])
                ):
                    best = (acc, float(tau), mean, True)
            if best is None:
                for tau, (acc, mean) in zip(taus, per_tau):
                    if best is None or acc > best[0] or (acc == best[0] and tau > best[1]):
                        best = (acc, float(tau), mean, False)
            out_acc[pi, bi], out_tau[pi, bi], out_mean[pi, bi], out_feas[pi, bi] = best

    return ThresholdTable(
        crossovers=tuple(float(p) for p in crossovers),
        budgets=tuple(int(b) for b in budgets),
        taus=out_tau,
        feasible=out_feas,
        accuracies=out_acc,
        mean_inputs=out_mean,
    )


def lookup_threshold(table: ThresholdTable, p: float, budget: int) -> float:
    """Row lookup with the next-highest-crossover rule."""
    rows = [c for c in table.crossovers if c >= p - 1e-12]
    if not rows:
        raise ValueError(f"crossover {p} exceeds every table row")
    row = table.crossovers.index(min(rows))
    try:
        col = table.budgets.index(budget)
    except ValueError:
        raise ValueError(f"budget {budget} not in table columns {table.budgets}") from None
    return float(table.taus[row, col])


def write_threshold_table_csv(table: ThresholdTable, path) -> None:
    """Crossover rows, input-budget columns; blank top-left corner cell."""
    with open(path, "w") as fh:
        fh.write("," + ",".join(str(b) for b in table.budgets) + "\n")
        for i, p in enumerate(table.crossovers):
            cells = ",".join(repr(float(t)) for t in table.taus[i])
            fh.write(f"{p!r},{cells}\n")


# ---------------------------------------------------------------------------
# Dictionary-size sweeps


def sweep_series(
    trials: Sequence[TrialRecord],
    spec: DictionarySpec,
    label: str,
    max_inputs: int = 50,
    resamples: int = 10_000,
    seed: int = 0,
) -> list[MetricSeries]:
    """Instantaneous-MAP metric series for one trial batch.

    Emits error-free accuracy (Wilson bounds), ITR (bounds mapped from the
    accuracy bounds), unit-interval deviation, alphabet accuracy (Wilson on
    character counts) and raw/normalized alphabet deviation (bootstrap
    bounds, resampled separately per input count).
    """
    n_d = spec.size
    r = len(spec.alphabets)
    n = len(trials)
    ks = tuple(range(1, max_inputs + 1))
    targets = {t.seed_key: decode_index(t.target, spec) for t in trials}

    acc_v, acc_lo, acc_hi = [], [], []
    itr_v, itr_lo, itr_hi = [], [], []
    dev_v, dev_lo, dev_hi = [], [], []
    aacc_v, aacc_lo, aacc_hi = [], [], []
    adev_v, adev_lo, adev_hi = [], [], []
    ndev_v, ndev_lo, ndev_hi = [], [], []

    for k in ks:
        hits = 0
        char_hits = 0
        devs = np.empty(n)
        adevs = np.empty(n)
        for i, t in enumerate(trials):
            est = t.map_at(k)
            hits += est == t.target
            devs[i] = abs(est - t.target) / n_d
            est_s = decode_index(est, spec)
            a_acc, a_dev, _ = alphabet_metrics(est_s, targets[t.seed_key])
            char_hits += round(a_acc * r)
            adevs[i] = a_dev

        p_k = hits / n
        w_lo, w_hi = wilson_interval(hits, n)
        acc_v.append(p_k), acc_lo.append(w_lo), acc_hi.append(w_hi)
        # rate bars are the rates of the accuracy limits; the rate formula
        # is non-monotone below chance, so order them and keep the point
        # estimate inside the interval
        r_k = itr(p_k, n_d)
        r_a, r_b = sorted((itr(w_lo, n_d), itr(w_hi, n_d)))
        itr_v.append(r_k), itr_lo.append(min(r_a, r_k)), itr_hi.append(max(r_b, r_k))

        b_lo, b_hi = bootstrap_ci(devs, resamples=resamples, seed=(seed, k, 0))
        dev_v.append(float(devs.mean())), dev_lo.append(b_lo), dev_hi.append(b_hi)

        ca_lo, ca_hi = wilson_interval(char_hits, n * r)
        aacc_v.append(char_hits / (n * r)), aacc_lo.append(ca_lo), aacc_hi.append(ca_hi)

        b_lo, b_hi = bootstrap_ci(adevs, resamples=resamples, seed=(seed, k, 1))
        adev_v.append(float(adevs.mean())), adev_lo.append(b_lo), adev_hi.append(b_hi)
        nd = adevs / r
        b_lo, b_hi = bootstrap_ci(nd, resamples=resamples, seed=(seed, k, 2))
        ndev_v.append(float(nd.mean())), ndev_lo.append(b_lo), ndev_hi.append(b_hi)

    def series(metric: str, v, lo, hi) -> MetricSeries:
        return MetricSeries(
            label=f"{label}|{metric}",
            inputs=ks,
            values=tuple(v),
            lo=tuple(lo),
            hi=tuple(hi),
        )

    return [
        series("accuracy", acc_v, acc_lo, acc_hi),
        series("itr", itr_v, itr_lo, itr_hi),
        series("deviation", dev_v, dev_lo, dev_hi),
        series("alphabet_accuracy", aacc_v, aacc_lo, aacc_hi),
        series("alphabet_deviation", adev_v, adev_lo, adev_hi),
        series("normalized_alphabet_deviation", ndev_v, ndev_lo, ndev_hi),
    ]


def sweep_dictionaries(
    base: ExperimentConfig,
    b_values: Sequence[int] = (3, 5),
    r_values: Sequence[int] = (2, 4, 6, 8),
    algorithms: Sequence[str] = ALGORITHMS,
    include_largest: bool = False,
    resamples: int = 10_000,
) -> dict[tuple[str, int, int], list[MetricSeries]]:
    """Cross product of algorithms and synthetic b^r dictionaries.

    The 390,625-string arm costs real memory and time, so it only runs
    with include_largest; other arms are desk scale.
    """
    out: dict[tuple[str, int, int], list[MetricSeries]] = {}
    for b in b_values:
        for r in r_values:
            if b**r > 100_000 and not include_largest:
                continue
            spec = synthetic_dictionary(b, r)
            for alg in algorithms:
                config = replace(base, spec=spec, algorithm=alg, stopping=None)
                trials = run_trials(config)
                label = f"{alg}|b={b}|r={r}|N={spec.size}"
                out[(alg, b, r)] = sweep_series(
                    trials,
                    spec,
                    label,
                    max_inputs=base.max_inputs,
                    resamples=resamples,
                    seed=base.seed,
                )
    return out


# ---------------------------------------------------------------------------
# Reports and export


def bin_report_rows(trials: Sequence[TrialRecord]) -> list[dict]:
    """Convergence accuracy by trial-length bin, Wilson bounds attached."""
    rows = []
    for name, group in bin_trials(trials).items():
        if not group:
            rows.append({"bin": name, "n": 0, "accuracy": "", "lo": "", "hi": ""})
            continue
        hits = sum(t.correct for t in group)
        lo, hi = wilson_interval(hits, len(group))
        rows.append(
            {"bin": name, "n": len(group), "accuracy": hits / len(group), "lo": lo, "hi": hi}
        )
    return rows


def write_trials_jsonl(trials: Iterable[TrialRecord], path) -> None:
    with open(path, "w") as fh:
        for t in trials:
            fh.write(json.dumps(trial_to_dict(t)) + "\n")
