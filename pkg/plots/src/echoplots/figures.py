"""Figure renderers.

Each function parses its inputs, writes a PNG, and returns the data it
plotted so tests can assert on arrays instead of pixels.  Nothing here
mutates an input file.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .formats import (  # noqa: E402
    SchemaError,
    read_checkpoints,
    read_degree_histogram,
    read_density_grid,
    read_results,
)

#: Bimodality coefficient of a uniform distribution; drawn as the reference line.
BC_REFERENCE = 5.0 / 9.0

DEFAULT_GROUP_KEYS = ("transmission", "distribution", "rewiring")


@dataclass
class CurveGroup:
    label: str
    phi: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def plot_phi_curve(results_csv, out_path, metric: str = "bc",
                   group_keys=DEFAULT_GROUP_KEYS) -> list[CurveGroup]:
    """Mean +- std of a metric vs phi, one curve per configuration group."""
    rows = read_results(results_csv)
    if metric not in rows[0]:
        raise SchemaError(f"{results_csv}: missing column {metric!r}")
    for key in group_keys:
        if key not in rows[0]:
            raise SchemaError(f"{results_csv}: missing column {key!r}")

    groups: dict[tuple, dict[float, list[float]]] = {}
    for row in rows:
        if row["outcome"] == "error":
            continue
        key = tuple(row[k] for k in group_keys)
        groups.setdefault(key, {}).setdefault(float(row["phi"]), []).append(float(row[metric]))

    curves = []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key in sorted(groups):
        by_phi = groups[key]
        phi = np.array(sorted(by_phi))
        mean = np.array([np.mean(by_phi[p]) for p in phi])
        std = np.array([np.std(by_phi[p], ddof=1) if len(by_phi[p]) > 1 else 0.0
                        for p in phi])
        label = " ".join(f"{k}={v}" for k, v in zip(group_keys, key))
        curves.append(CurveGroup(label=label, phi=phi, mean=mean, std=std))
        ax.plot(phi, mean, marker="o", label=label)
        ax.fill_between(phi, mean - std, mean + std, alpha=0.25)
    if metric == "bc":
        ax.axhline(BC_REFERENCE, linestyle="--", color="black", linewidth=1,
                   label=f"uniform reference {BC_REFERENCE:.3f}")
    ax.set_xlabel("phi")
    ax.set_ylabel(metric)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return curves


def plot_density_heatmap(grid_file, out_path) -> np.ndarray:
    """Heatmap of an opinion vs neighbor-average density grid.

    Lighter color marks denser cells; both axes span [-1, 1].
    """
    grid = read_density_grid(grid_file)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(grid, origin="lower", extent=(-1, 1, -1, 1),
                   cmap="viridis", aspect="auto")
    fig.colorbar(im, ax=ax, label="users")
    ax.set_xlabel("opinion b")
    ax.set_ylabel("neighbor average b_nn")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return grid


def plot_transient(checkpoint_csv, out_path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """BC vs iteration, one line per run in the checkpoint file."""
    series = read_checkpoints(checkpoint_csv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for run_id in sorted(series):
        iterations, bc = series[run_id]
        ax.plot(iterations, bc, label=run_id, linewidth=1)
    ax.axhline(BC_REFERENCE, linestyle="--", color="black", linewidth=1)
    ax.set_xlabel("iteration")
    ax.set_ylabel("bc")
    if len(series) <= 12:
        ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return series


def plot_degree_overlay(before_edges, after_edges, out_path) -> tuple[dict, dict]:
    """Degree distributions of two edge-list files on shared axes."""
    before = read_degree_histogram(before_edges)
    after = read_degree_histogram(after_edges)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for hist, label in ((before, "before"), (after, "after")):
        degrees = np.array(sorted(hist))
        counts = np.array([hist[d] for d in degrees])
        ax.plot(degrees, counts, marker="o", label=label, alpha=0.8)
    ax.set_xlabel("degree")
    ax.set_ylabel("nodes")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return before, after
