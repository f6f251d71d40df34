"""Parsers for the simulator's documented output files.

These deliberately re-implement the file formats rather than importing the
simulator: the contract between the two packages is the bytes on disk.

- results CSV: header
  run_id,topology,n,avg_k,transmission,distribution,phi,rewiring,delta,seed,
  iterations,converged,bc,beta,corr,outcome
- checkpoints CSV: run_id,iteration,bc
- density grid: '# bins B' and '# range ...' header lines, then B rows of
  B space-separated counts (rows are neighbor-average bins from -1 up,
  columns opinion bins from -1 up)
- edge list: 'i j' pairs, '#' comments, optional '# nodes N' header
"""

from __future__ import annotations

import csv
from collections import Counter

import numpy as np


class SchemaError(ValueError):
    """An input file does not match its documented format."""


RESULTS_COLUMNS = [
    "run_id", "topology", "n", "avg_k", "transmission", "distribution", "phi",
    "rewiring", "delta", "seed", "iterations", "converged", "bc", "beta",
    "corr", "outcome",
]


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in RESULTS_COLUMNS:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_checkpoints(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    series: dict[str, tuple[list, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for column in ("run_id", "iteration", "bc"):
            if column not in (reader.fieldnames or []):
                raise SchemaError(f"{path}: missing column {column!r}")
        for row in reader:
            its, bcs = series.setdefault(row["run_id"], ([], []))
            its.append(int(row["iteration"]))
            bcs.append(float(row["bc"]))
    if not series:
        raise SchemaError(f"{path}: no data rows")
    return {k: (np.asarray(v[0]), np.asarray(v[1])) for k, v in series.items()}


def read_density_grid(path) -> np.ndarray:
    bins = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                fields = text[1:].split()
                if len(fields) >= 2 and fields[0] == "bins":
                    bins = int(fields[1])
                continue
            try:
                rows.append([int(tok) for tok in text.split()])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-integer count") from None
    grid = np.asarray(rows, dtype=np.int64)
    if bins is None:
        raise SchemaError(f"{path}: missing '# bins B' header")
    if grid.shape != (bins, bins):
        raise SchemaError(f"{path}: grid is {grid.shape}, header declares {bins}x{bins}")
    return grid


def read_degree_histogram(path) -> dict[int, int]:
    """Degree -> node count from an edge-list file (isolated nodes need the
    '# nodes N' header to be counted)."""
    declared = None
    degree: Counter[int] = Counter()
    seen: set[int] = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                fields = text[1:].split()
                if len(fields) == 2 and fields[0] == "nodes" and fields[1].isdigit():
                    declared = int(fields[1])
                continue
            parts = text.split()
            if len(parts) != 2:
                raise SchemaError(f"{path}:{lineno}: expected 'i j'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-integer node id") from None
            degree[u] += 1
            degree[v] += 1
            seen.update((u, v))
    hist = Counter(degree.values())
    node_total = declared if declared is not None else len(seen)
    isolated = node_total - len(degree)
    if isolated > 0:
        hist[0] += isolated
    return dict(hist)
