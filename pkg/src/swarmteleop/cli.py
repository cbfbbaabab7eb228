"""Command-line interface.

Subcommands: simulate (trial batches), threshold-table, sweep
(dictionary-size series), bin-report, and serve (the interactive
service). Report commands write CSV plus rendered PNG figures next to
them; --no-figures keeps just the data files.
"""

from __future__ import annotations

import json
import os

import click
import numpy as np

from . import harness, viz
from .channel import default_crossover_samples, parse_profile_arg
from .codec import StoppingRule
from .dictionary import load_dictionary, swarm_dictionary, synthetic_dictionary
from .metrics import write_series_csv
from .service import ServiceConfig, create_app


def _resolve_dictionary(name: str):
    if name == "swarm60":
        return swarm_dictionary()
    if name.startswith("synthetic:"):
        _, b, r = name.split(":")
        return synthetic_dictionary(int(b), int(r))
    return load_dictionary(name)


@click.group()
def main():
    """Posterior-matching swarm teleoperation toolkit."""


@main.command()
@click.option("--dictionary", default="swarm60", show_default=True, help="swarm60, synthetic:<b>:<r>, or a dictionary JSON path")
@click.option("--algorithm", type=click.Choice(harness.ALGORITHMS), default="posterior_matching", show_default=True)
@click.option("--assumed-p", type=float, default=0.1, show_default=True, help="crossover assumed by the posterior")
@click.option("--error", default="fixed:0.1", show_default=True, help="generated errors: fixed:<p>, pchip:default, or pchip:<file>")
@click.option("--tau", type=float, default=None, help="stopping threshold; omit for sweep mode (no stopping)")
@click.option("--tau-from-table", type=click.Path(exists=True), default=None, help="threshold_table.csv to look the threshold up in")
@click.option("--budget", type=int, default=25, show_default=True, help="input budget column for table lookup")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--max-inputs", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default="simulate_out", show_default=True, help="output directory")
@click.option("--figures/--no-figures", default=True, show_default=True)
def simulate(dictionary, algorithm, assumed_p, error, tau, tau_from_table, budget, trials, max_inputs, seed, out, figures):
    """Run a batch of simulated-user trials and report the outcomes."""
    spec = _resolve_dictionary(dictionary)
    profile = parse_profile_arg(error)
    if tau_from_table is not None:
        table = _read_table_csv(tau_from_table)
        tau = harness.lookup_threshold(table, assumed_p, budget)
        click.echo(f"threshold from table: tau={tau}")
    stopping = StoppingRule(tau=tau, max_inputs=max_inputs) if tau is not None else None

    config = harness.ExperimentConfig(
        spec=spec,
        algorithm=algorithm,
        assumed_p=assumed_p,
        profile=profile,
        stopping=stopping,
        max_inputs=max_inputs,
        n_trials=trials,
        seed=seed,
    )
    records = harness.run_trials(config)
    os.makedirs(out, exist_ok=True)
    harness.write_trials_jsonl(records, os.path.join(out, "trials.jsonl"))

    label = f"{algorithm}|N={spec.size}"
    series = harness.sweep_series(records, spec, label, max_inputs=max_inputs, resamples=2000, seed=seed)
    write_series_csv(os.path.join(out, "metrics.csv"), series)

    correct = sum(r.correct for r in records)
    click.echo(f"{correct}/{trials} trials ended on the target ({correct / trials:.1%})")
    if figures:
        viz.plot_metric_series(series, os.path.join(out, "metrics.png"), title=label)
        viz.plot_input_histogram(records, os.path.join(out, "input_histogram.png"), max_inputs)
        if hasattr(profile, "knots_x"):
            viz.plot_crossover_profile(profile, os.path.join(out, "crossover_profile.png"), samples=default_crossover_samples())
    click.echo(f"wrote {out}/")


@main.command("threshold-table")
@click.option("--budgets", default="25", show_default=True, help="comma-separated input budgets")
@click.option("--trials-per-cell", type=int, default=500, show_default=True)
@click.option("--n-strings", type=int, default=60, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default="threshold_out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def threshold_table(budgets, trials_per_cell, n_strings, seed, out, figures):
    """Generate the stopping-threshold lookup table by simulation."""
    budget_list = tuple(int(b) for b in budgets.split(","))
    table = harness.generate_threshold_table(
        budgets=budget_list, trials_per_cell=trials_per_cell, n_d=n_strings, seed=seed
    )
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "threshold_table.csv")
    harness.write_threshold_table_csv(table, path)
    with open(os.path.join(out, "threshold_table_detail.json"), "w") as fh:
        json.dump(
            {
                "crossovers": list(table.crossovers),
                "budgets": list(table.budgets),
                "taus": table.taus.tolist(),
                "feasible": table.feasible.tolist(),
                "accuracies": table.accuracies.tolist(),
                "mean_inputs": table.mean_inputs.tolist(),
            },
            fh,
            indent=2,
        )
    if figures:
        viz.plot_threshold_table(table, os.path.join(out, "threshold_table.png"))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--b-values", default="3,5", show_default=True)
@click.option("--r-values", default="2,4,6,8", show_default=True)
@click.option("--error", default="fixed:0.1", show_default=True)
@click.option("--assumed-p", type=float, default=0.1, show_default=True)
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--resamples", type=int, default=10000, show_default=True, help="bootstrap resamples per point")
@click.option("--include-largest", is_flag=True, help="also run the 390,625-string arm")
@click.option("--out", type=click.Path(), default="sweep_out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def sweep(b_values, r_values, error, assumed_p, trials, seed, resamples, include_largest, out, figures):
    """Sweep synthetic dictionary sizes for both interaction algorithms."""
    base = harness.ExperimentConfig(
        spec=swarm_dictionary(),  # replaced per arm
        assumed_p=assumed_p,
        profile=parse_profile_arg(error),
        stopping=None,
        n_trials=trials,
        seed=seed,
    )
    results = harness.sweep_dictionaries(
        base,
        b_values=tuple(int(b) for b in b_values.split(",")),
        r_values=tuple(int(r) for r in r_values.split(",")),
        include_largest=include_largest,
        resamples=resamples,
    )
    os.makedirs(out, exist_ok=True)
    all_series = [s for bundle in results.values() for s in bundle]
    write_series_csv(os.path.join(out, "sweep_metrics.csv"), all_series)
    if figures:
        for b in {key[1] for key in results}:
            subset = [s for key, bundle in results.items() if key[1] == b for s in bundle]
            viz.plot_metric_series(subset, os.path.join(out, f"sweep_b{b}.png"), title=f"alphabet size {b}")
    click.echo(f"wrote {out}/sweep_metrics.csv with {len(all_series)} series")


@main.command("bin-report")
@click.option("--trials-file", type=click.Path(exists=True), required=True, help="trials.jsonl from simulate")
@click.option("--out", type=click.Path(), default="bin_report_out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def bin_report(trials_file, out, figures):
    """Accuracy by convergence-time bin for a recorded trial batch."""
    from .metrics import trial_from_dict

    with open(trials_file) as fh:
        records = [trial_from_dict(json.loads(line)) for line in fh if line.strip()]
    rows = harness.bin_report_rows(records)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "bin_report.csv")
    with open(path, "w") as fh:
        fh.write("bin,n,accuracy,lo,hi\n")
        for row in rows:
            fh.write(f"{row['bin']},{row['n']},{row['accuracy']!r},{row['lo']!r},{row['hi']!r}\n")
    if figures:
        viz.plot_bin_report(rows, os.path.join(out, "bin_report.png"))
    for row in rows:
        if row["n"]:
            click.echo(f"{row['bin']:>7}: n={row['n']:<6} accuracy={row['accuracy']:.3f}")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="ServiceConfig JSON file")
def serve(port, host, config_path):
    """Serve interactive teleoperation sessions over HTTP and WebSocket."""
    import uvicorn

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig()
    app = create_app(default_config=config)
    uvicorn.run(app, host=host, port=port, log_level="info")


def _read_table_csv(path) -> harness.ThresholdTable:
    """Parse the row/column table layout back into a ThresholdTable."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    budgets = tuple(int(b) for b in lines[0].split(",")[1:])
    crossovers, taus = [], []
    for line in lines[1:]:
        cells = line.split(",")
        crossovers.append(float(cells[0]))
        taus.append([float(c) for c in cells[1:]])
    arr = np.asarray(taus)
    shape = np.ones_like(arr, dtype=bool)
    return harness.ThresholdTable(
        crossovers=tuple(crossovers),
        budgets=budgets,
        taus=arr,
        feasible=shape,
        accuracies=np.zeros_like(arr),
        mean_inputs=np.zeros_like(arr),
    )


if __name__ == "__main__":
    main()
