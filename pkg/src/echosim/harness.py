"""Experiment orchestration: replicated phi sweeps, presets, result tables.

A sweep expands (combo, phi, replicate) triples into independent runs, each
carrying its own seed derived from `seed_base` by stable index arithmetic,
so enlarging a sweep never changes the seeds of existing runs.  Runs execute
on a bounded thread pool (the step kernel releases the GIL) and results are
sorted into a canonical order, making the output a pure function of the
spec regardless of the parallelism degree.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .dynamics import (
    DistributionKind,
    DynamicsConfig,
    OpinionState,
    TransmissionKind,
    initial_state,
    run,
)
from .graph import GeneratorSpec, Graph, ParameterError

RESULTS_HEADER = [
    "run_id", "topology", "n", "avg_k", "transmission", "distribution", "phi",
    "rewiring", "delta", "seed", "iterations", "converged", "bc", "beta",
    "corr", "outcome",
]
CHECKPOINTS_HEADER = ["run_id", "iteration", "bc"]


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteadyStateRule:
    """Stop once the BC checkpoint series flattens.

    The run is considered steady when at least `window` checkpoints exist,
    at least `min_iterations` have executed, and the last `window` BC values
    span no more than `tolerance`.  `max_iterations` caps the run; hitting
    it records converged=False.
    """

    checkpoint_interval: int = 100_000
    window: int = 10
    tolerance: float = 0.02
    min_iterations: int = 1_000_000
    max_iterations: int = 10_000_000

    def __post_init__(self):
        if self.min_iterations > self.max_iterations:
            raise ParameterError("min_iterations must not exceed max_iterations")
        if self.tolerance <= 0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if self.window < 1 or self.checkpoint_interval < 1:
            raise ParameterError("window and checkpoint_interval must be positive")


def detect_steady_state(bc_series, rule: SteadyStateRule) -> bool:
    """True once the tail of the BC series has settled (see SteadyStateRule).

    A window of all-NaN values (a frozen degenerate distribution) counts as
    steady; a window mixing NaN and numbers does not.
    """
    series = np.asarray(bc_series, dtype=np.float64)
    if series.size < rule.window:
        return False
    if series.size * rule.checkpoint_interval < rule.min_iterations:
        return False
    tail = series[-rule.window:]
    bad = np.isnan(tail)
    if bad.all():
        return True
    if bad.any():
        return False
    return float(tail.max() - tail.min()) <= rule.tolerance


# ---------------------------------------------------------------------------
# Sweep specification and records
# ---------------------------------------------------------------------------


@dataclass
class SweepSpec:
    """Everything needed to reproduce a family of runs.

    `combos` lists the (transmission, distribution) function pairs; the grid
    presets put several here so one spec can cover a whole figure's worth of
    configurations.
    """

    generator: GeneratorSpec
    combos: list[tuple[TransmissionKind, DistributionKind]]
    phi_values: list[float]
    replicates: int = 10
    seed_base: int = 0
    rewiring: bool = False
    delta: float = 0.1
    steady_state: SteadyStateRule = field(default_factory=SteadyStateRule)

    def __post_init__(self):
        if self.replicates < 1:
            raise ParameterError(f"replicates must be >= 1, got {self.replicates}")
        if not self.phi_values:
            raise ParameterError("phi_values must be nonempty")
        if not self.combos:
            raise ParameterError("combos must be nonempty")
        self.combos = [
            (TransmissionKind(t), DistributionKind(d)) for t, d in self.combos
        ]

    def run_seed(self, combo_idx: int, phi_idx: int, replicate: int) -> int:
        # Disjoint bit fields keep seeds stable when the sweep is enlarged.
        return self.seed_base + (combo_idx << 40) + (replicate << 20) + phi_idx


@dataclass
class RunRecord:
    """One row of the results table plus the BC checkpoint series."""

    run_id: str
    topology: str
    n: int
    avg_k: float
    transmission: TransmissionKind
    distribution: DistributionKind
    phi: float
    rewiring: bool
    delta: float
    seed: int
    iterations: int
    converged: bool
    bc: float
    beta: float
    corr: float
    outcome: str
    checkpoint_iterations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    checkpoint_bc: np.ndarray = field(default_factory=lambda: np.empty(0))
    final_graph: Graph | None = None
    final_state: OpinionState | None = None
    error: str = ""


def _execute_one(spec: SweepSpec, combo_idx: int, phi_idx: int, replicate: int,
                 keep_states: bool) -> RunRecord:
    transmission, distribution = spec.combos[combo_idx]
    phi = spec.phi_values[phi_idx]
    seed = spec.run_seed(combo_idx, phi_idx, replicate)
    topology, n, avg_k = spec.generator.describe()
    run_id = f"{combo_idx:02d}-{phi_idx:03d}-{replicate:03d}"
    rule = spec.steady_state
    base = dict(
        run_id=run_id, topology=topology, n=n, avg_k=avg_k,
        transmission=transmission, distribution=distribution, phi=phi,
        rewiring=spec.rewiring, delta=spec.delta, seed=seed,
    )
    try:
        graph = spec.generator.build(seed)
        config = DynamicsConfig(
            transmission=transmission, distribution=distribution, phi=phi,
            iterations=rule.max_iterations, seed=seed, delta=spec.delta,
            rewiring=spec.rewiring, checkpoint_interval=rule.checkpoint_interval,
        )
        state = initial_state(graph.node_count, config)
        trace = run(graph, state, config,
                    stop_when=lambda series: detect_steady_state(series, rule))
        report, _ = metrics.score_state(trace.final_graph, trace.final_state.opinions)
        return RunRecord(
            **base,
            iterations=trace.iterations_run,
            converged=trace.converged,
            bc=report.bc, beta=report.beta, corr=report.corr_b_bnn,
            outcome=report.outcome.value,
            checkpoint_iterations=trace.checkpoint_iterations,
            checkpoint_bc=trace.checkpoint_bc,
            final_graph=trace.final_graph if keep_states else None,
            final_state=trace.final_state if keep_states else None,
        )
    except Exception as exc:  # per-run failures must not kill the sweep
        return RunRecord(
            **base,
            iterations=0, converged=False,
            bc=float("nan"), beta=float("nan"), corr=float("nan"),
            outcome="error", error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(spec: SweepSpec, parallelism: int = 1,
              keep_states: bool = False) -> list[RunRecord]:
    """Execute the whole sweep; output order is (combo, phi, replicate).

    The record list is identical for any parallelism degree.
    """
    if parallelism < 1:
        raise ParameterError(f"parallelism must be >= 1, got {parallelism}")
    tasks = [
        (ci, pi, r)
        for ci in range(len(spec.combos))
        for pi in range(len(spec.phi_values))
        for r in range(spec.replicates)
    ]
    if parallelism == 1:
        return [_execute_one(spec, *t, keep_states) for t in tasks]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_execute_one, spec, *t, keep_states) for t in tasks]
        records = [f.result() for f in futures]
    records.sort(key=lambda rec: rec.run_id)
    return records


@dataclass
class AggregateRow:
    transmission: TransmissionKind
    distribution: DistributionKind
    rewiring: bool
    phi: float
    mean_bc: float
    std_bc: float
    mean_beta: float
    std_beta: float
    count: int


def aggregate(records: list[RunRecord]) -> list[AggregateRow]:
    """Per-(configuration, phi) mean and sample standard deviation of BC and beta."""
    if not records:
        raise ParameterError("no records to aggregate")
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.error:
            continue
        key = (rec.transmission, rec.distribution, rec.rewiring, rec.phi)
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(groups, key=lambda k: (k[0].value, k[1].value, k[2], k[3])):
        recs = groups[key]
        bc = np.array([r.bc for r in recs])
        beta = np.array([r.beta for r in recs])
        rows.append(AggregateRow(
            transmission=key[0], distribution=key[1], rewiring=key[2], phi=key[3],
            mean_bc=float(bc.mean()),
            std_bc=float(bc.std(ddof=1)) if bc.size > 1 else 0.0,
            mean_beta=float(beta.mean()),
            std_beta=float(beta.std(ddof=1)) if beta.size > 1 else 0.0,
            count=len(recs),
        ))
    return rows


# ---------------------------------------------------------------------------
# Result serialization
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (TransmissionKind, DistributionKind)):
        return value.value
    return str(value)


def write_results_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, col)) for col in RESULTS_HEADER])


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_checkpoints_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CHECKPOINTS_HEADER)
        for rec in records:
            for it, bc in zip(rec.checkpoint_iterations, rec.checkpoint_bc):
                writer.writerow([rec.run_id, int(it), _fmt(float(bc))])


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_ALL_TRANSMISSIONS = [TransmissionKind.POL, TransmissionKind.UNI,
                      TransmissionKind.SIM, TransmissionKind.ALL]
_COS_DISTRIBUTIONS = [DistributionKind.D_I, DistributionKind.D_II]


def phi_grid(count: int = 33, lo: float = 0.0, hi: float = 2.0 * math.pi) -> list[float]:
    """Evenly spaced phases, endpoints included."""
    return [float(v) for v in np.linspace(lo, hi, count)]


def _er_spec() -> GeneratorSpec:
    return GeneratorSpec(kind="er", n=1000, avg_degree=8.0)


def _grid_combos() -> list[tuple[TransmissionKind, DistributionKind]]:
    return [(t, d) for d in _COS_DISTRIBUTIONS for t in _ALL_TRANSMISSIONS]


def _null_combos() -> list[tuple[TransmissionKind, DistributionKind]]:
    return [(t, DistributionKind.D_III) for t in _ALL_TRANSMISSIONS]


def _topology_preset(generator: GeneratorSpec) -> SweepSpec:
    return SweepSpec(
        generator=generator, combos=_grid_combos(), phi_values=[0.0, 1.473],
        replicates=10, rewiring=False,
    )


_PRESET_BUILDERS = {
    # Full rewiring grid: every transmission kind x both cosine distribution
    # rules across the whole phase range.
    "phi-sweep-rewiring": lambda: SweepSpec(
        generator=_er_spec(), combos=_grid_combos(), phi_values=phi_grid(),
        replicates=10, rewiring=True,
    ),
    "phi-sweep-norewiring": lambda: SweepSpec(
        generator=_er_spec(), combos=_grid_combos(), phi_values=phi_grid(),
        replicates=10, rewiring=False,
    ),
    # Distribution fixed to the deliver-to-everyone null model, isolating the
    # effect of the transmission functions.
    "null-distribution-rewiring": lambda: SweepSpec(
        generator=_er_spec(), combos=_null_combos(), phi_values=[0.0],
        replicates=10, rewiring=True,
    ),
    "null-distribution-norewiring": lambda: SweepSpec(
        generator=_er_spec(), combos=_null_combos(), phi_values=[0.0],
        replicates=10, rewiring=False,
    ),
    # Transmission fixed to the post-everything null model, isolating the
    # effect of the distribution rules.
    "fixed-transmission-uni": lambda: SweepSpec(
        generator=_er_spec(),
        combos=[(TransmissionKind.UNI, d) for d in _COS_DISTRIBUTIONS],
        phi_values=phi_grid(), replicates=10, rewiring=False,
    ),
    # Two weakly coupled communities; the same parameters land in consensus
    # on some seeds and in echo chambers on others.
    "sbm-bistable": lambda: SweepSpec(
        generator=GeneratorSpec(kind="sbm", sizes=(500, 500),
                                p_in=8.0 / 499.0, p_out=8e-5),
        combos=[(TransmissionKind.UNI, DistributionKind.D_II)],
        phi_values=[1.47], replicates=50, rewiring=False,
    ),
    # Same network, polarized transmission.  Each block collapses to one
    # extreme on its own, so replicates split between all-agree (consensus)
    # and opposed blocks (echo chamber).  Under the post-everything rule the
    # blocks never leave a centered unimodal state and no split occurs.
    "sbm-bistable-pol": lambda: SweepSpec(
        generator=GeneratorSpec(kind="sbm", sizes=(500, 500),
                                p_in=8.0 / 499.0, p_out=8e-5),
        combos=[(TransmissionKind.POL, DistributionKind.D_II)],
        phi_values=[1.47], replicates=50, rewiring=False,
        steady_state=SteadyStateRule(min_iterations=20_000_000,
                                     max_iterations=20_000_000),
    ),
    # Alternative topologies at the two reference phases.
    "topology-er": lambda: _topology_preset(_er_spec()),
    "topology-lattice": lambda: _topology_preset(GeneratorSpec(kind="lattice2d", side=32)),
    "topology-rrg": lambda: _topology_preset(GeneratorSpec(kind="rrg", n=1000, k=8)),
    "topology-powerlaw": lambda: _topology_preset(
        GeneratorSpec(kind="powerlaw", n=1000, gamma=2.2, k_min=4, k_max=40)),
    "topology-lfr": lambda: _topology_preset(
        GeneratorSpec(kind="lfr", n=1000, mu=0.1, gamma=2.2, avg_degree=8.0, k_max=40)),
}

PRESET_NAMES = sorted(_PRESET_BUILDERS)


def preset_experiment(name: str, seed_base: int = 0,
                      replicates: int | None = None) -> SweepSpec:
    """A fully populated SweepSpec for one of the named experiment suites."""
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    spec = builder()
    spec.seed_base = seed_base
    if replicates is not None:
        spec = replace(spec, replicates=replicates)
    return spec
