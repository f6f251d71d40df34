"""Polarization measurements over opinion vectors and their network context.

Two families live here.  Distribution-shape statistics (skewness, excess
kurtosis, the bimodality coefficient, balance) look only at the opinion
values.  Structure-aware measurements pair each node's opinion with the mean
opinion of its neighbors: the (b, b_nn) density map, their Pearson
correlation, quadrant masses, and the outcome classifier built on top.

The bimodality coefficient uses bias-uncorrected moment estimators with the
excess-kurtosis convention, so a large uniform sample scores close to the
5/9 reference value and a large normal sample close to 1/3.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import Graph

#: Reference BC of a uniform distribution; above leans bimodal, below unimodal.
BC_CRITIC = 5.0 / 9.0

# Outcome-classifier constants, calibrated on the three archetypes
# (single blob / two same-sign-quadrant blobs / vertical band).
ECHO_CORR_MIN = 0.6
ECHO_QUADRANT_MASS_MIN = 0.8
CONSENSUS_STD_MAX = 0.35
DIVERSE_BC_BAND = 0.05
DIVERSE_CORR_MAX = 0.3
QUADRANT_DEAD_ZONE = 0.05  # |b| or |b_nn| below this straddles an axis; not counted

DEFAULT_DENSITY_BINS = 64


class UndefinedMetricError(ValueError):
    """The requested statistic is not defined for this sample."""


class Outcome(Enum):
    CONSENSUS = "consensus"
    ECHO_CHAMBER = "echo_chamber"
    DIVERSE = "diverse"
    MIXED = "mixed"


# ---------------------------------------------------------------------------
# Distribution-shape statistics
# ---------------------------------------------------------------------------


def _central_moments(samples) -> tuple[int, float, float, float]:
    a = np.asarray(samples, dtype=np.float64)
    n = a.size
    if n < 4:
        raise UndefinedMetricError(f"need at least 4 samples, got {n}")
    d = a - a.mean()
    m2 = float(np.mean(d * d))
    if m2 <= 0.0:
        raise UndefinedMetricError("zero variance")
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    return n, m2, m3, m4


def skewness(samples) -> float:
    """Moment-estimator skewness g = m3 / m2^(3/2) (no bias correction)."""
    _, m2, m3, _ = _central_moments(samples)
    return m3 / m2 ** 1.5


def excess_kurtosis(samples) -> float:
    """Moment-estimator excess kurtosis k = m4 / m2^2 - 3."""
    _, m2, _, m4 = _central_moments(samples)
    return m4 / (m2 * m2) - 3.0


def bimodality_coefficient(samples) -> float:
    """(g^2 + 1) / (k + 3(n-1)^2 / ((n-2)(n-3))) with g, k as above."""
    n, m2, m3, m4 = _central_moments(samples)
    g = m3 / m2 ** 1.5
    k = m4 / (m2 * m2) - 3.0
    correction = 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3))
    return (g * g + 1.0) / (k + correction)


def balance(samples) -> float:
    """min/max ratio of the strictly-negative and strictly-positive counts.

    Exact zeros belong to neither side.  Returns 0 when one side is empty;
    raises when both are (a pile of exact zeros has no balance).
    """
    a = np.asarray(samples, dtype=np.float64)
    c1 = int(np.count_nonzero(a < 0.0))
    c2 = int(np.count_nonzero(a > 0.0))
    if c1 == 0 and c2 == 0:
        raise UndefinedMetricError("all samples are exactly zero")
    if min(c1, c2) == 0:
        return 0.0
    return min(c1, c2) / max(c1, c2)


# ---------------------------------------------------------------------------
# Structure-aware measurements
# ---------------------------------------------------------------------------


def neighbor_average_opinions(graph: Graph, opinions) -> np.ndarray:
    """Per-node mean opinion over neighbors; NaN for isolated nodes."""
    b = np.asarray(opinions, dtype=np.float64)
    if b.shape[0] != graph.node_count:
        raise ValueError(
            f"opinion vector length {b.shape[0]} != node count {graph.node_count}"
        )
    sums = np.zeros(graph.node_count, dtype=np.float64)
    u, v = graph.edge_arrays()
    np.add.at(sums, u, b[v])
    np.add.at(sums, v, b[u])
    deg = graph.degrees().astype(np.float64)
    with np.errstate(invalid="ignore"):
        return np.where(deg > 0, sums / deg, np.nan)


@dataclass
class DensityMap:
    """2D histogram of (b, b_nn) pairs over [-1, 1] x [-1, 1].

    ``counts[iy, ix]`` with ix binning b and iy binning b_nn, both ascending
    from -1; values exactly at +1 land in the last bin.
    """

    counts: np.ndarray
    bins: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _bin_index(values: np.ndarray, bins: int) -> np.ndarray:
    idx = np.floor((values + 1.0) * 0.5 * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def density_map(b, b_nn, bins: int = DEFAULT_DENSITY_BINS) -> DensityMap:
    """Histogram the scored (b, b_nn) pairs; NaN pairs are dropped."""
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    b = np.asarray(b, dtype=np.float64)
    y = np.asarray(b_nn, dtype=np.float64)
    ok = np.isfinite(b) & np.isfinite(y)
    ix = _bin_index(b[ok], bins)
    iy = _bin_index(y[ok], bins)
    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (iy, ix), 1)
    return DensityMap(counts=counts, bins=bins)


def pearson_correlation(x, y) -> float:
    """Pearson r, or NaN when either variable has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx <= 0.0 or vy <= 0.0:
        return float("nan")
    return float(np.dot(dx, dy) / np.sqrt(vx * vy))


def quadrant_masses(b, b_nn, dead_zone: float = QUADRANT_DEAD_ZONE) -> tuple[float, float, float, float]:
    """Fractions of scored pairs in quadrants I..IV of the (b, b_nn) plane.

    Pairs within `dead_zone` of either axis are not assigned to any quadrant,
    so the four fractions sum to at most 1.
    """
    b = np.asarray(b, dtype=np.float64)
    y = np.asarray(b_nn, dtype=np.float64)
    total = b.size
    if total == 0:
        return (0.0, 0.0, 0.0, 0.0)
    clear = (np.abs(b) >= dead_zone) & (np.abs(y) >= dead_zone)
    q1 = int(np.count_nonzero(clear & (b > 0) & (y > 0)))
    q2 = int(np.count_nonzero(clear & (b < 0) & (y > 0)))
    q3 = int(np.count_nonzero(clear & (b < 0) & (y < 0)))
    q4 = int(np.count_nonzero(clear & (b > 0) & (y < 0)))
    return (q1 / total, q2 / total, q3 / total, q4 / total)


def classify_outcome(b, b_nn, bc: float) -> Outcome:
    """Label a final state as consensus / echo chamber / diverse / mixed.

    Echo chamber: bimodal opinions whose carriers sit in like-minded
    neighborhoods (high b-b_nn correlation, mass in quadrants I+III).
    Consensus: non-bimodal with a tight opinion spread.  Diverse: a
    uniform-like spread with no opinion-neighborhood alignment.  Anything
    else is mixed.  When the correlation is undefined (a constant b or b_nn)
    only the consensus test can apply.
    """
    b = np.asarray(b, dtype=np.float64)
    y = np.asarray(b_nn, dtype=np.float64)
    if b.size < 10:
        raise UndefinedMetricError(f"need at least 10 scored nodes, got {b.size}")
    std_b = float(np.std(b))
    corr = pearson_correlation(b, y)
    if np.isnan(corr):
        if std_b < CONSENSUS_STD_MAX:
            return Outcome.CONSENSUS
        raise UndefinedMetricError("degenerate variance with a wide opinion spread")
    q = quadrant_masses(b, y)
    if bc > BC_CRITIC and corr > ECHO_CORR_MIN and q[0] + q[2] > ECHO_QUADRANT_MASS_MIN:
        return Outcome.ECHO_CHAMBER
    if bc <= BC_CRITIC and std_b < CONSENSUS_STD_MAX:
        return Outcome.CONSENSUS
    if abs(bc - BC_CRITIC) <= DIVERSE_BC_BAND and abs(corr) < DIVERSE_CORR_MAX:
        return Outcome.DIVERSE
    return Outcome.MIXED


@dataclass
class MetricsReport:
    bc: float
    beta: float
    corr_b_bnn: float
    quadrant_mass: tuple[float, float, float, float]
    outcome: Outcome
    sample_count: int


def score_state(graph: Graph, opinions,
                bins: int = DEFAULT_DENSITY_BINS) -> tuple[MetricsReport, DensityMap]:
    """Full measurement pass over one (graph, opinions) state.

    BC and balance are computed on all opinions; the correlation, quadrant
    masses, density map and outcome label use only nodes with at least one
    neighbor (b_nn is undefined on isolated nodes).
    """
    b_all = np.asarray(opinions, dtype=np.float64)
    bc = bimodality_coefficient(b_all)
    beta = balance(b_all)
    b_nn = neighbor_average_opinions(graph, b_all)
    scored = np.isfinite(b_nn)
    b = b_all[scored]
    y = b_nn[scored]
    report = MetricsReport(
        bc=bc,
        beta=beta,
        corr_b_bnn=pearson_correlation(b, y),
        quadrant_mass=quadrant_masses(b, y),
        outcome=classify_outcome(b, y, bc),
        sample_count=int(b.size),
    )
    return report, density_map(b, y, bins=bins)
