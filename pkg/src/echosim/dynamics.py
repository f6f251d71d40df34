"""The iteration engine: post transmission, distribution, opinion updates, rewiring.

Each iteration picks a random poster, draws a post value theta uniformly on
[-1, 1], and rolls transmission with a probability driven by |theta - b_i|.
A transmitted post reaches each neighbor j with a probability driven by
|b_i - b_j| (the platform's distribution rule); receivers are attracted or
repulsed, nudging their opinion by +-delta with clamping to [-1, 1]; when
rewiring is enabled, repulsed receivers may drop the edge to the poster and
reconnect to a uniformly chosen non-neighbor.

Two implementations share one RNG stream: :func:`step` is the readable
single-iteration reference operating on :class:`~echosim.graph.Graph`, and
:func:`run` drives the compiled kernel over dense arrays.  Both consume
draws in the same fixed order, so a run is reproducible draw-for-draw from
`(graph, initial state, config)` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernel, metrics
from .graph import Graph, rewire_edge
from .rng import Xoshiro256, seed_state

_HALF_PI = math.pi * 0.5

# Phases are snapped to a dyadic grid of pi / 2**26 (~4.7e-8 rad).  The
# distribution rules have period pi in the phase, and the snap makes that
# identity exact in floats: phi and phi + pi reduce to the same grid point,
# so runs at both phases consume identical streams and produce identical
# trajectories.
_PHASE_TICKS = 1 << 26


def canonical_phase(phi: float) -> float:
    """Reduce a phase to its canonical representative in [0, pi)."""
    if not math.isfinite(phi):
        raise ValueError(f"phase must be finite, got {phi}")
    k = round(phi / math.pi * _PHASE_TICKS) % _PHASE_TICKS
    return k * (math.pi / _PHASE_TICKS)


class TransmissionKind(Enum):
    POL = "pol"  # posts the most agreeable and the most contrarian content
    SIM = "sim"  # posts agreeable content only
    UNI = "uni"  # posts everything
    ALL = "all"  # each node keeps one of the three behaviors, drawn once


class DistributionKind(Enum):
    D_I = "d1"   # cos^2(x*pi/2 + phi)
    D_II = "d2"  # cos^2(x/2*pi/2 + phi), half the slope in x
    D_III = "d3"  # delivers to every neighbor


_BEHAVIOR_CODE = {TransmissionKind.POL: 0, TransmissionKind.SIM: 1, TransmissionKind.UNI: 2}
_DIST_CODE = {DistributionKind.D_I: 0, DistributionKind.D_II: 1, DistributionKind.D_III: 2}


def _check_x(x: float) -> None:
    if not 0.0 <= x <= 2.0:
        raise ValueError(f"opinion difference must lie in [0, 2], got {x}")


def transmission_prob(kind: TransmissionKind, x: float) -> float:
    """Probability that a node posts content at opinion distance x."""
    _check_x(x)
    if kind is TransmissionKind.POL:
        return math.cos(x * _HALF_PI) ** 2
    if kind is TransmissionKind.SIM:
        return math.cos(x * _HALF_PI) ** 2 if x <= 1.0 else 0.0
    if kind is TransmissionKind.UNI:
        return 1.0
    raise ValueError("ALL is a per-node mixture; resolve it to a behavior first")


def distribution_prob(kind: DistributionKind, x: float, phi: float) -> float:
    """Probability that the platform delivers a post across distance x."""
    _check_x(x)
    if kind is DistributionKind.D_III:
        return 1.0
    phase = canonical_phase(phi)
    if kind is DistributionKind.D_I:
        return math.cos(x * _HALF_PI + phase) ** 2
    return math.cos(x * 0.5 * _HALF_PI + phase) ** 2


def attraction_prob(theta: float, b_j: float) -> float:
    """Probability that a receiver is attracted rather than repulsed."""
    if not (-1.0 <= theta <= 1.0 and -1.0 <= b_j <= 1.0):
        raise ValueError(f"opinions must lie in [-1, 1], got theta={theta}, b_j={b_j}")
    return 1.0 - abs(theta - b_j) * 0.5


def rewire_prob(x: float) -> float:
    """Probability that a repulsed receiver drops the edge; zero unless x > 1."""
    return math.cos(x * _HALF_PI) ** 2 if x > 1.0 else 0.0


def apply_opinion_update(b_j: float, theta: float, attracted: bool, delta: float) -> float:
    """Nudge b_j by delta toward theta (attracted) or away (repulsed), clamped.

    The step size takes the sign of theta - b_j, positive at exact equality.
    """
    d = -delta if theta < b_j else delta
    nb = b_j + d if attracted else b_j - d
    if nb > 1.0:
        return 1.0
    if nb < -1.0:
        return -1.0
    return nb


def assign_behaviors(n: int, rng: np.random.Generator) -> np.ndarray:
    """One fixed behavior per node, each of the three kinds with weight 1/3."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return rng.integers(0, 3, size=n).astype(np.int8)


# ---------------------------------------------------------------------------
# Run configuration and state
# ---------------------------------------------------------------------------


@dataclass
class DynamicsConfig:
    transmission: TransmissionKind
    distribution: DistributionKind
    phi: float
    iterations: int
    seed: int
    delta: float = 0.1
    rewiring: bool = False
    checkpoint_interval: int = 100_000

    def __post_init__(self):
        self.transmission = TransmissionKind(self.transmission)
        self.distribution = DistributionKind(self.distribution)
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")
        if not 0.0 < self.delta <= 2.0:
            raise ValueError(f"delta must lie in (0, 2], got {self.delta}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be non-negative, got {self.iterations}")
        if self.checkpoint_interval < 1:
            raise ValueError(
                f"checkpoint_interval must be positive, got {self.checkpoint_interval}"
            )


@dataclass
class OpinionState:
    """Per-node opinions in [-1, 1] plus, for ALL runs, per-node behaviors."""

    opinions: np.ndarray
    behavior: np.ndarray | None = None

    def __post_init__(self):
        self.opinions = np.asarray(self.opinions, dtype=np.float64)
        if self.opinions.size and (self.opinions.min() < -1.0 or self.opinions.max() > 1.0):
            raise ValueError("opinions must lie in [-1, 1]")

    def copy(self) -> OpinionState:
        beh = None if self.behavior is None else self.behavior.copy()
        return OpinionState(self.opinions.copy(), beh)


def initial_state(n: int, config: DynamicsConfig) -> OpinionState:
    """Uniform random opinions (and behaviors, for ALL) from config.seed."""
    rng = np.random.default_rng(config.seed)
    opinions = rng.uniform(-1.0, 1.0, n)
    behavior = None
    if config.transmission is TransmissionKind.ALL:
        behavior = assign_behaviors(n, rng)
    return OpinionState(opinions, behavior)


def _behavior_codes(state: OpinionState, config: DynamicsConfig, n: int) -> np.ndarray:
    if config.transmission is TransmissionKind.ALL:
        if state.behavior is None:
            raise ValueError("transmission ALL needs a per-node behavior assignment")
        if state.behavior.shape[0] != n:
            raise ValueError("behavior assignment length does not match node count")
        return state.behavior.astype(np.int8)
    return np.full(n, _BEHAVIOR_CODE[config.transmission], dtype=np.int8)


# ---------------------------------------------------------------------------
# Reference step
# ---------------------------------------------------------------------------


@dataclass
class StepEvents:
    """Diagnostic record of one iteration (mirrors the kernel's draw order)."""

    poster: int
    theta: float
    transmitted: bool
    receivers: list[int] = field(default_factory=list)
    attracted: list[bool] = field(default_factory=list)
    rewires: list[tuple[int, int, int]] = field(default_factory=list)


def step(graph: Graph, state: OpinionState, config: DynamicsConfig,
         rng: Xoshiro256) -> StepEvents:
    """Execute one iteration in place; the slow, readable twin of the kernel.

    Consumes the RNG stream exactly as the kernel does, so interleaving
    `step` calls with kernel chunks on the same stream stays coherent.
    """
    n = graph.node_count
    opinions = state.opinions
    behavior = _behavior_codes(state, config, n)
    kinds = (TransmissionKind.POL, TransmissionKind.SIM, TransmissionKind.UNI)

    i = rng.randint(n)
    theta = 2.0 * rng.uniform() - 1.0
    b_i = opinions[i]
    p_t = transmission_prob(kinds[behavior[i]], abs(theta - b_i))
    if rng.uniform() >= p_t:
        return StepEvents(poster=i, theta=theta, transmitted=False)

    events = StepEvents(poster=i, theta=theta, transmitted=True)
    for j in sorted(graph.neighbors(i)):
        p_d = distribution_prob(config.distribution, abs(b_i - opinions[j]), config.phi)
        if rng.uniform() < p_d:
            events.receivers.append(j)

    repulsed: list[int] = []
    for j in events.receivers:
        attracted = rng.uniform() < attraction_prob(theta, opinions[j])
        events.attracted.append(attracted)
        opinions[j] = apply_opinion_update(opinions[j], theta, attracted, config.delta)
        if not attracted:
            repulsed.append(j)

    if config.rewiring:
        for j in repulsed:
            p_r = rewire_prob(abs(b_i - opinions[j]))
            if rng.uniform() < p_r:
                if graph.degree(j) >= n - 1:
                    continue  # everything outside {j} is already a neighbor
                while True:
                    t = rng.randint(n)
                    if t != j and not graph.has_edge(j, t):
                        break
                rewire_edge(graph, j, i, t)
                events.rewires.append((j, i, t))
    return events


# ---------------------------------------------------------------------------
# Fast run
# ---------------------------------------------------------------------------


@dataclass
class RunTrace:
    """Outcome of one run: BC checkpoint series plus the final state."""

    checkpoint_iterations: np.ndarray
    checkpoint_bc: np.ndarray
    final_graph: Graph
    final_state: OpinionState
    iterations_run: int
    converged: bool


def run(graph: Graph, state: OpinionState, config: DynamicsConfig,
        stop_when=None) -> RunTrace:
    """Execute up to config.iterations steps on copies of the inputs.

    Records the bimodality coefficient of the opinions every
    `checkpoint_interval` iterations (NaN while the distribution is
    degenerate).  `stop_when`, if given, is called with the BC series after
    each checkpoint; returning True ends the run early with converged=True.
    """
    n = graph.node_count
    if state.opinions.shape[0] != n:
        raise ValueError(
            f"state has {state.opinions.shape[0]} opinions for {n} nodes"
        )
    adj, deg = graph.to_numpy()
    opinions = state.opinions.copy()
    behavior = _behavior_codes(state, config, n)
    dist_code = _DIST_CODE[config.distribution]
    phase = canonical_phase(config.phi)
    rng_state = seed_state(config.seed)
    receivers = np.empty(n, dtype=np.int64)
    repulsed = np.empty(n, dtype=np.int64)

    interval = config.checkpoint_interval
    checkpoint_iters: list[int] = []
    checkpoint_bc: list[float] = []
    done = 0
    converged = False
    while done < config.iterations:
        chunk = min(interval, config.iterations - done)
        _kernel.run_chunk(adj, deg, opinions, behavior, dist_code, phase,
                          config.delta, config.rewiring, chunk, rng_state,
                          receivers, repulsed)
        done += chunk
        if done % interval == 0:
            try:
                bc = metrics.bimodality_coefficient(opinions)
            except metrics.UndefinedMetricError:
                bc = float("nan")
            checkpoint_iters.append(done)
            checkpoint_bc.append(bc)
            if stop_when is not None and stop_when(checkpoint_bc):
                converged = True
                break

    final_behavior = None if state.behavior is None else state.behavior.copy()
    return RunTrace(
        checkpoint_iterations=np.asarray(checkpoint_iters, dtype=np.int64),
        checkpoint_bc=np.asarray(checkpoint_bc, dtype=np.float64),
        final_graph=Graph.from_numpy(adj),
        final_state=OpinionState(opinions, final_behavior),
        iterations_run=done,
        converged=converged,
    )
