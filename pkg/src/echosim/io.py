"""File formats: edge lists, opinion files, density-map grids.

All formats are plain text with `#` comment lines and `.` decimal points.
An edge list holds one undirected edge per line as two whitespace-separated
non-negative integers, each edge listed once.  An opinion file holds one
`node_id opinion` pair per line.  A density grid is a two-line header (bin
count, axis range) followed by one row of space-separated counts per line.

The empirical loader accepts arbitrary node ids (it compacts them to
0..n-1 and returns the mapping) and symmetrizes directed input: duplicate
edges and self-loops are dropped and counted rather than rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .graph import Graph
from .metrics import DensityMap, MetricsReport


class EdgeListFormatError(ValueError):
    """An edge-list line failed to parse; the message carries the line number."""


class OpinionFileError(ValueError):
    """An opinion file failed validation against its graph."""


# ---------------------------------------------------------------------------
# Edge lists
# ---------------------------------------------------------------------------


def save_edge_list(graph: Graph, path, comment: str | None = None) -> None:
    # the `# nodes N` header lets a reload recover isolated nodes, which the
    # bare edge list cannot represent
    with open(path, "w") as fh:
        fh.write(f"# nodes {graph.node_count}\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for i, j in graph.edges():
            fh.write(f"{i} {j}\n")


@dataclass
class EdgeListResult:
    graph: Graph
    id_map: dict[int, int]  # original id -> compact id
    duplicate_count: int
    self_loop_count: int
    raw_edge_count: int


def load_edge_list(path) -> EdgeListResult:
    """Parse an edge list into a simple undirected graph.

    Node ids are compacted to 0..n-1 in ascending original order.  Self-loops
    and duplicates (either orientation) are dropped and counted.
    """
    pairs: list[tuple[int, int]] = []
    ids: set[int] = set()
    declared_nodes: int | None = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                fields = text[1:].split()
                if len(fields) == 2 and fields[0] == "nodes" and fields[1].isdigit():
                    declared_nodes = int(fields[1])
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListFormatError(
                    f"{path}:{lineno}: expected two fields, got {len(parts)}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListFormatError(
                    f"{path}:{lineno}: non-integer node id in {text!r}"
                ) from None
            if u < 0 or v < 0:
                raise EdgeListFormatError(
                    f"{path}:{lineno}: negative node id in {text!r}"
                )
            pairs.append((u, v))
            ids.add(u)
            ids.add(v)
    if declared_nodes is not None and all(0 <= i < declared_nodes for i in ids):
        # ids are already dense under the declared count: keep them verbatim
        id_map = {i: i for i in range(declared_nodes)}
    else:
        id_map = {orig: k for k, orig in enumerate(sorted(ids))}
    graph = Graph(len(id_map))
    duplicates = 0
    self_loops = 0
    for u, v in pairs:
        if u == v:
            self_loops += 1
            continue
        if not graph.add_edge(id_map[u], id_map[v]):
            duplicates += 1
    return EdgeListResult(
        graph=graph, id_map=id_map, duplicate_count=duplicates,
        self_loop_count=self_loops, raw_edge_count=len(pairs),
    )


# ---------------------------------------------------------------------------
# Opinion files
# ---------------------------------------------------------------------------


def save_opinions(opinions, path) -> None:
    values = np.asarray(opinions, dtype=np.float64)
    with open(path, "w") as fh:
        for i, v in enumerate(values):
            fh.write(f"{i} {float(v)!r}\n")


def load_opinions(path, id_map: dict[int, int] | None = None,
                  n: int | None = None) -> np.ndarray:
    """Read per-node opinions, validating coverage and range.

    `id_map` translates original ids (as written in the file) to compact ids;
    pass the mapping returned by :func:`load_edge_list`.  Without a mapping,
    ids are taken as already compact in 0..n-1.
    """
    if id_map is None:
        if n is None:
            raise ValueError("need either id_map or n")
        id_map = {i: i for i in range(n)}
    values = np.full(len(id_map), np.nan, dtype=np.float64)
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise OpinionFileError(
                    f"{path}:{lineno}: expected 'node_id opinion', got {text!r}"
                )
            try:
                node = int(parts[0])
                value = float(parts[1])
            except ValueError:
                raise OpinionFileError(f"{path}:{lineno}: malformed pair {text!r}") from None
            if node not in id_map:
                raise OpinionFileError(f"{path}:{lineno}: unknown node id {node}")
            if not -1.0 <= value <= 1.0:
                raise OpinionFileError(
                    f"{path}:{lineno}: opinion {value} outside [-1, 1]"
                )
            idx = id_map[node]
            if not np.isnan(values[idx]):
                raise OpinionFileError(f"{path}:{lineno}: duplicate opinion for node {node}")
            values[idx] = value
    missing = np.flatnonzero(np.isnan(values))
    if missing.size:
        reverse = {v: k for k, v in id_map.items()}
        shown = ", ".join(str(reverse[int(i)]) for i in missing[:5])
        raise OpinionFileError(
            f"{path}: {missing.size} node(s) without an opinion (e.g. {shown})"
        )
    return values


# ---------------------------------------------------------------------------
# Density grids
# ---------------------------------------------------------------------------


def save_density_map(dm: DensityMap, path) -> None:
    """Two-line header (bin count, axis range), then one count row per line.

    Row k holds the b_nn bin k (ascending from -1); columns are b bins.
    """
    with open(path, "w") as fh:
        fh.write(f"# bins {dm.bins}\n")
        fh.write("# range -1 1 -1 1\n")
        for row in dm.counts:
            fh.write(" ".join(str(int(c)) for c in row) + "\n")


def load_density_map(path) -> DensityMap:
    bins = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                parts = text[1:].split()
                if parts and parts[0] == "bins":
                    bins = int(parts[1])
                continue
            try:
                rows.append([int(tok) for tok in text.split()])
            except ValueError:
                raise EdgeListFormatError(f"{path}:{lineno}: non-integer count") from None
    counts = np.asarray(rows, dtype=np.int64)
    if bins is None or counts.shape != (bins, bins):
        raise EdgeListFormatError(
            f"{path}: grid shape {counts.shape} does not match declared bins {bins}"
        )
    return DensityMap(counts=counts, bins=bins)


# ---------------------------------------------------------------------------
# Empirical datasets
# ---------------------------------------------------------------------------


@dataclass
class EmpiricalDataset:
    """A real network with one opinion per node, e.g. a labeled follow graph."""

    graph: Graph
    opinions: np.ndarray
    label: str = ""


def load_empirical(edge_path, opinion_path, label: str = "") -> EmpiricalDataset:
    loaded = load_edge_list(edge_path)
    opinions = load_opinions(opinion_path, id_map=loaded.id_map)
    return EmpiricalDataset(graph=loaded.graph, opinions=opinions, label=label)


def analyze_empirical(dataset: EmpiricalDataset,
                      bins: int = metrics.DEFAULT_DENSITY_BINS) -> tuple[MetricsReport, DensityMap]:
    """Score an empirical dataset exactly as a simulated final state."""
    return metrics.score_state(dataset.graph, dataset.opinions, bins=bins)
