"""`echoplot <kind> --in <path> --out <image>` command."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .figures import plot_degree_overlay, plot_density_heatmap, plot_phi_curve, plot_transient
from .formats import SchemaError


@click.group()
def main():
    """Render figures from simulator result files."""


_in_option = click.option("--in", "in_path", required=True,
                          type=click.Path(exists=True, path_type=Path))
_out_option = click.option("--out", "out_path", required=True,
                           type=click.Path(dir_okay=False, path_type=Path))


@main.command(name="phi-curve")
@_in_option
@_out_option
@click.option("--metric", type=click.Choice(["bc", "beta"]), default="bc",
              show_default=True)
@click.option("--group-by", default="transmission,distribution,rewiring",
              show_default=True, help="Comma-separated result columns.")
def phi_curve(in_path, out_path, metric, group_by):
    """Mean +- std of a metric vs phi from a results CSV."""
    curves = plot_phi_curve(in_path, out_path, metric=metric,
                            group_keys=tuple(group_by.split(",")))
    click.echo(f"wrote {out_path} ({len(curves)} curve(s))")


@main.command()
@_in_option
@_out_option
def heatmap(in_path, out_path):
    """Opinion vs neighbor-average heatmap from a density grid file."""
    grid = plot_density_heatmap(in_path, out_path)
    click.echo(f"wrote {out_path} ({grid.shape[0]}x{grid.shape[1]} bins)")


@main.command()
@_in_option
@_out_option
def transient(in_path, out_path):
    """BC vs iteration curves from a checkpoints CSV."""
    series = plot_transient(in_path, out_path)
    click.echo(f"wrote {out_path} ({len(series)} run(s))")


@main.command(name="degree-overlay")
@_in_option
@click.option("--in2", "in2_path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Edge list to overlay (e.g. the post-run network).")
@_out_option
def degree_overlay(in_path, in2_path, out_path):
    """Degree distributions of two edge lists on shared axes."""
    plot_degree_overlay(in_path, in2_path, out_path)
    click.echo(f"wrote {out_path}")


def entry() -> None:
    try:
        main.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except (SchemaError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
