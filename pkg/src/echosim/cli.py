"""Command-line interface: generate / run / sweep / preset / analyze.

Every invocation writes a `manifest.txt` into its output directory echoing
the fully resolved configuration (seeds included), and all outputs are
plain text (CSV tables, edge lists, density grids) so downstream tooling
needs no access to package internals.  Exit codes: 0 on success, 1 on a
runtime failure, 2 on a usage error.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
import numpy as np

from . import harness, io, metrics
from .dynamics import (
    DistributionKind,
    DynamicsConfig,
    TransmissionKind,
    initial_state,
    run,
)
from .graph import GeneratorSpec
from .harness import PRESET_NAMES, RunRecord, SteadyStateRule, SweepSpec

_OUTDIR_ENV = "ECHOSIM_OUTDIR"


def _outdir_option():
    return click.option(
        "--outdir", type=click.Path(file_okay=False, path_type=Path),
        default=lambda: os.environ.get(_OUTDIR_ENV, "."), show_default="env or cwd",
        help=f"Output directory (default from ${_OUTDIR_ENV}).",
    )


def _write_manifest(outdir: Path, command: str, settings: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "manifest.txt", "w") as fh:
        fh.write(f"command {command}\n")
        for key in sorted(settings):
            fh.write(f"{key} {settings[key]}\n")


_GENERATOR_OPTIONS = [
    click.option("--kind", type=click.Choice(["er", "sbm", "lattice2d", "rrg",
                                              "powerlaw", "lfr"]),
                 help="Graph family to generate."),
    click.option("--n", type=int, default=1000, show_default=True),
    click.option("--avg-k", type=float, default=8.0, show_default=True),
    click.option("--sizes", type=(int, int), default=(500, 500), show_default=True,
                 help="SBM block sizes."),
    click.option("--p-in", type=float, default=8.0 / 499.0, help="SBM within-block probability."),
    click.option("--p-out", type=float, default=8e-5, help="SBM between-block probability."),
    click.option("--side", type=int, default=32, show_default=True, help="Lattice side length."),
    click.option("--k", type=int, default=8, show_default=True, help="RRG degree."),
    click.option("--gamma", type=float, default=2.2, show_default=True,
                 help="Power-law exponent."),
    click.option("--k-min", type=int, default=4, show_default=True),
    click.option("--k-max", type=int, default=40, show_default=True),
    click.option("--mu", type=float, default=0.1, show_default=True, help="LFR mixing."),
]


def _with_generator_options(fn):
    for opt in reversed(_GENERATOR_OPTIONS):
        fn = opt(fn)
    return fn


def _generator_from_flags(kind, n, avg_k, sizes, p_in, p_out, side, k, gamma,
                          k_min, k_max, mu) -> GeneratorSpec:
    if kind is None:
        raise click.UsageError("a generator --kind is required")
    return GeneratorSpec(kind=kind, n=n, avg_degree=avg_k, sizes=tuple(sizes),
                         p_in=p_in, p_out=p_out, side=side, k=k, gamma=gamma,
                         k_min=k_min, k_max=k_max, mu=mu)


_DYNAMICS_OPTIONS = [
    click.option("--transmission", type=click.Choice([t.value for t in TransmissionKind]),
                 required=True),
    click.option("--distribution", type=click.Choice([d.value for d in DistributionKind]),
                 required=True),
    click.option("--phi", type=float, default=0.0, show_default=True),
    click.option("--delta", type=float, default=0.1, show_default=True),
    click.option("--rewiring/--no-rewiring", default=False, show_default=True),
]


def _with_dynamics_options(fn):
    for opt in reversed(_DYNAMICS_OPTIONS):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Opinion-dynamics simulator for algorithmically curated social feeds."""


@main.command()
@_with_generator_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Edge-list path (default <outdir>/edges.txt).")
@_outdir_option()
def generate(kind, n, avg_k, sizes, p_in, p_out, side, k, gamma, k_min, k_max,
             mu, seed, out, outdir):
    """Generate a network and write it as an edge list."""
    spec = _generator_from_flags(kind, n, avg_k, sizes, p_in, p_out, side, k,
                                 gamma, k_min, k_max, mu)
    graph = spec.build(seed)
    outdir.mkdir(parents=True, exist_ok=True)
    out = out or outdir / "edges.txt"
    io.save_edge_list(graph, out, comment=f"kind={spec.kind} seed={seed}")
    _write_manifest(outdir, "generate", {"spec": spec, "seed": seed, "out": out})
    click.echo(f"wrote {graph.node_count} nodes, {graph.edge_count} edges to {out}")


@main.command(name="run")
@click.option("--graph", "graph_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Edge-list file; omit to generate inline.")
@_with_generator_options
@_with_dynamics_options
@click.option("--iterations", type=int, required=True)
@click.option("--checkpoint-interval", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--keep-states", is_flag=True, help="Also write final edge list and opinions.")
@click.option("--density-bins", type=int, default=metrics.DEFAULT_DENSITY_BINS,
              show_default=True)
@_outdir_option()
def run_cmd(graph_path, kind, n, avg_k, sizes, p_in, p_out, side, k, gamma,
            k_min, k_max, mu, transmission, distribution, phi, delta, rewiring,
            iterations, checkpoint_interval, seed, keep_states, density_bins, outdir):
    """Execute a single run and report its final metrics."""
    if graph_path is not None:
        g = io.load_edge_list(graph_path).graph
        topology = str(graph_path)
        avg_deg = 2.0 * g.edge_count / max(g.node_count, 1)
    else:
        spec = _generator_from_flags(kind, n, avg_k, sizes, p_in, p_out, side,
                                     k, gamma, k_min, k_max, mu)
        g = spec.build(seed)
        topology, _, avg_deg = spec.describe()
    config = DynamicsConfig(
        transmission=transmission, distribution=distribution, phi=phi,
        iterations=iterations, seed=seed, delta=delta, rewiring=rewiring,
        checkpoint_interval=checkpoint_interval,
    )
    state = initial_state(g.node_count, config)
    trace = run(g, state, config)
    report, dm = metrics.score_state(trace.final_graph, trace.final_state.opinions,
                                     bins=density_bins)

    outdir.mkdir(parents=True, exist_ok=True)
    record = RunRecord(
        run_id="00-000-000", topology=topology, n=g.node_count, avg_k=avg_deg,
        transmission=config.transmission, distribution=config.distribution,
        phi=phi, rewiring=rewiring, delta=delta, seed=seed,
        iterations=trace.iterations_run, converged=trace.converged,
        bc=report.bc, beta=report.beta, corr=report.corr_b_bnn,
        outcome=report.outcome.value,
        checkpoint_iterations=trace.checkpoint_iterations,
        checkpoint_bc=trace.checkpoint_bc,
    )
    harness.write_results_csv([record], outdir / "results.csv")
    harness.write_checkpoints_csv([record], outdir / "checkpoints.csv")
    io.save_density_map(dm, outdir / "density.txt")
    if keep_states:
        io.save_edge_list(trace.final_graph, outdir / "final_edges.txt")
        io.save_opinions(trace.final_state.opinions, outdir / "final_opinions.txt")
    _write_manifest(outdir, "run", {
        "graph": topology, "config": config, "keep_states": keep_states,
        "density_bins": density_bins,
    })
    click.echo(f"bc {report.bc:.6g}")
    click.echo(f"beta {report.beta:.6g}")
    click.echo(f"outcome {report.outcome.value}")


def _run_and_write_sweep(spec: SweepSpec, parallelism: int, outdir: Path,
                         keep_states: bool, manifest_cmd: str) -> None:
    records = harness.run_sweep(spec, parallelism=parallelism, keep_states=keep_states)
    outdir.mkdir(parents=True, exist_ok=True)
    harness.write_results_csv(records, outdir / "results.csv")
    harness.write_checkpoints_csv(records, outdir / "checkpoints.csv")
    if keep_states:
        states_dir = outdir / "states"
        states_dir.mkdir(exist_ok=True)
        for rec in records:
            if rec.final_graph is not None:
                io.save_edge_list(rec.final_graph, states_dir / f"{rec.run_id}_edges.txt")
                io.save_opinions(rec.final_state.opinions,
                                 states_dir / f"{rec.run_id}_opinions.txt")
    _write_manifest(outdir, manifest_cmd, {
        "spec": spec, "parallelism": parallelism, "keep_states": keep_states,
    })
    failures = sum(1 for r in records if r.error)
    click.echo(f"wrote {len(records)} runs to {outdir / 'results.csv'}"
               + (f" ({failures} failed)" if failures else ""))


_STEADY_OPTIONS = [
    click.option("--max-iterations", type=int, default=10_000_000, show_default=True),
    click.option("--min-iterations", type=int, default=1_000_000, show_default=True),
    click.option("--checkpoint-interval", type=int, default=100_000, show_default=True),
    click.option("--window", type=int, default=10, show_default=True),
    click.option("--tolerance", type=float, default=0.02, show_default=True),
]


def _with_steady_options(fn):
    for opt in reversed(_STEADY_OPTIONS):
        fn = opt(fn)
    return fn


@main.command()
@_with_generator_options
@_with_dynamics_options
@click.option("--phi-count", type=int, default=33, show_default=True)
@click.option("--phi-min", type=float, default=0.0, show_default=True)
@click.option("--phi-max", type=float, default=2.0 * np.pi, show_default=True)
@_with_steady_options
@click.option("--replicates", type=int, default=10, show_default=True)
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--keep-states", is_flag=True)
@_outdir_option()
def sweep(kind, n, avg_k, sizes, p_in, p_out, side, k, gamma, k_min, k_max, mu,
          transmission, distribution, phi, delta, rewiring, phi_count, phi_min,
          phi_max, max_iterations, min_iterations, checkpoint_interval, window,
          tolerance, replicates, seed_base, parallelism, keep_states, outdir):
    """Sweep phi for one (transmission, distribution) pair with replicates."""
    generator = _generator_from_flags(kind, n, avg_k, sizes, p_in, p_out, side,
                                      k, gamma, k_min, k_max, mu)
    rule = SteadyStateRule(
        checkpoint_interval=checkpoint_interval, window=window, tolerance=tolerance,
        min_iterations=min_iterations, max_iterations=max_iterations,
    )
    spec = SweepSpec(
        generator=generator,
        combos=[(TransmissionKind(transmission), DistributionKind(distribution))],
        phi_values=harness.phi_grid(phi_count, phi_min, phi_max),
        replicates=replicates, seed_base=seed_base, rewiring=rewiring,
        delta=delta, steady_state=rule,
    )
    _run_and_write_sweep(spec, parallelism, outdir, keep_states, "sweep")


@main.command()
@click.argument("name")
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--replicates", type=int, default=None,
              help="Override the preset's replicate count.")
@click.option("--keep-states", is_flag=True)
@_outdir_option()
def preset(name, seed_base, parallelism, replicates, keep_states, outdir):
    """Run a named experiment suite (see `preset list`)."""
    if name == "list":
        for preset_name in PRESET_NAMES:
            click.echo(preset_name)
        return
    if name not in PRESET_NAMES:
        raise click.UsageError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    spec = harness.preset_experiment(name, seed_base=seed_base, replicates=replicates)
    _run_and_write_sweep(spec, parallelism, outdir, keep_states, f"preset {name}")


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--opinions", "opinion_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--label", default="", help="Dataset label for the manifest.")
@click.option("--bins", type=int, default=metrics.DEFAULT_DENSITY_BINS, show_default=True)
@_outdir_option()
def analyze(graph_path, opinion_path, label, bins, outdir):
    """Score an empirical network + opinion file like a simulated state."""
    loaded = io.load_edge_list(graph_path)
    opinions = io.load_opinions(opinion_path, id_map=loaded.id_map)
    dataset = io.EmpiricalDataset(graph=loaded.graph, opinions=opinions, label=label)
    report, dm = io.analyze_empirical(dataset, bins=bins)
    outdir.mkdir(parents=True, exist_ok=True)
    io.save_density_map(dm, outdir / "density.txt")
    _write_manifest(outdir, "analyze", {
        "graph": graph_path, "opinions": opinion_path, "label": label,
        "bins": bins, "raw_edges": loaded.raw_edge_count,
        "duplicate_edges": loaded.duplicate_count,
        "self_loops": loaded.self_loop_count,
        "nodes": loaded.graph.node_count, "edges": loaded.graph.edge_count,
    })
    click.echo(f"nodes {loaded.graph.node_count}")
    click.echo(f"edges {loaded.graph.edge_count} "
               f"(raw {loaded.raw_edge_count}, duplicates {loaded.duplicate_count}, "
               f"self-loops {loaded.self_loop_count})")
    click.echo(f"bc {report.bc:.6g}")
    click.echo(f"beta {report.beta:.6g}")
    click.echo(f"corr {report.corr_b_bnn:.6g}")
    click.echo(f"outcome {report.outcome.value}")


def entry() -> None:
    """Console entry point mapping runtime failures to exit code 1."""
    try:
        main.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except (ValueError, RuntimeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
