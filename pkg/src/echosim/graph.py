"""Undirected simple graphs and the network generators used by the simulator.

The :class:`Graph` structure is a plain adjacency-set representation: edge
insertion, removal and membership are O(1), which is what the rewiring step
of the dynamics needs.  Node ids are dense integers ``0..n-1`` everywhere.

Generators are deterministic functions of their parameters and a seed; two
calls with the same arguments produce identical edge sets.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """A generator or operation was called with out-of-range parameters."""


class GenerationError(RuntimeError):
    """A randomized generator failed to produce a valid graph within its retry budget."""


# ---------------------------------------------------------------------------
# Graph structure
# ---------------------------------------------------------------------------


class Graph:
    """Mutable undirected simple graph over nodes ``0..n-1``.

    Invariants (checkable via :meth:`validate`): no self-loops, no duplicate
    edges, adjacency symmetry, and an exact cached edge count.
    """

    __slots__ = ("_adj", "_edge_count")

    def __init__(self, n: int):
        if n < 0:
            raise ParameterError(f"node count must be non-negative, got {n}")
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._edge_count = 0

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        g = cls(n)
        for i, j in edges:
            g.add_edge(i, j)
        return g

    def copy(self) -> Graph:
        g = Graph(self.node_count)
        g._adj = [set(s) for s in self._adj]
        g._edge_count = self._edge_count
        return g

    # -- basic accessors ----------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self._adj], dtype=np.int64)

    def neighbors(self, i: int) -> set[int]:
        """The neighbor set of ``i`` (the live set; treat as read-only)."""
        return self._adj[i]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def edges(self):
        """Iterate edges once each as ``(i, j)`` with ``i < j``, in sorted order."""
        for i, nbrs in enumerate(self._adj):
            for j in sorted(nbrs):
                if i < j:
                    yield (i, j)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as two int64 arrays (each edge listed once, i < j)."""
        m = self._edge_count
        u = np.empty(m, dtype=np.int64)
        v = np.empty(m, dtype=np.int64)
        k = 0
        for i, j in self.edges():
            u[k] = i
            v[k] = j
            k += 1
        return u, v

    # -- mutation -----------------------------------------------------------

    def add_edge(self, i: int, j: int) -> bool:
        """Insert edge ``(i, j)``; returns False if it already exists.

        Self-loops are rejected outright rather than silently dropped.
        """
        if i == j:
            raise ParameterError(f"self-loop ({i},{i}) not allowed")
        if not (0 <= i < len(self._adj) and 0 <= j < len(self._adj)):
            raise ParameterError(f"edge ({i},{j}) out of range for n={len(self._adj)}")
        if j in self._adj[i]:
            return False
        self._adj[i].add(j)
        self._adj[j].add(i)
        self._edge_count += 1
        return True

    def remove_edge(self, i: int, j: int) -> None:
        if j not in self._adj[i]:
            raise ParameterError(f"edge ({i},{j}) not present")
        self._adj[i].remove(j)
        self._adj[j].remove(i)
        self._edge_count -= 1

    # -- dense views for the step kernel ------------------------------------

    def to_numpy(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense adjacency matrix (uint8) plus degree vector (int64)."""
        n = self.node_count
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, nbrs in enumerate(self._adj):
            for j in nbrs:
                adj[i, j] = 1
        return adj, self.degrees()

    @classmethod
    def from_numpy(cls, adj: np.ndarray) -> Graph:
        n = adj.shape[0]
        g = cls(n)
        rows, cols = np.nonzero(adj)
        for i, j in zip(rows.tolist(), cols.tolist()):
            if i < j:
                g._adj[i].add(j)
                g._adj[j].add(i)
                g._edge_count += 1
        return g

    # -- diagnostics ---------------------------------------------------------

    def validate(self) -> None:
        """Assert the structural invariants; raises AssertionError on breach."""
        count = 0
        for i, nbrs in enumerate(self._adj):
            assert i not in nbrs, f"self-loop at {i}"
            for j in nbrs:
                assert 0 <= j < len(self._adj), f"neighbor {j} out of range"
                assert i in self._adj[j], f"asymmetric edge ({i},{j})"
            count += len(nbrs)
        assert count % 2 == 0
        assert count // 2 == self._edge_count, (
            f"edge count mismatch: cached {self._edge_count}, actual {count // 2}"
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


def rewire_edge(g: Graph, mover: int, dropped: int, target: int) -> None:
    """Replace edge ``(mover, dropped)`` by ``(mover, target)``.

    Preconditions (caller bugs raise): the dropped edge exists and the target
    is neither the mover nor one of its current neighbors.  Edge count and the
    mover's degree are conserved exactly.
    """
    if not g.has_edge(mover, dropped):
        raise ParameterError(f"edge ({mover},{dropped}) not present")
    if target == mover or g.has_edge(mover, target):
        raise ParameterError(f"target {target} invalid for mover {mover}")
    g.remove_edge(mover, dropped)
    g.add_edge(mover, target)


def degree_distribution(g: Graph) -> dict[int, int]:
    """Histogram degree -> node count; sums to n, degree-weighted sum is 2m."""
    return dict(Counter(g.degree(i) for i in range(g.node_count)))


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, nodes relabeled 0..m-1.

    Relabeling preserves the order of the original ids.  Ties between equal
    size components go to the one containing the smallest original id.
    """
    n = g.node_count
    if n == 0:
        return Graph(0)
    seen = np.zeros(n, dtype=bool)
    best: list[int] = []
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        head = 0
        while head < len(comp):
            for j in g.neighbors(comp[head]):
                if not seen[j]:
                    seen[j] = True
                    comp.append(j)
            head += 1
        if len(comp) > len(best):  # strict: first (lowest-id) component wins ties
            best = comp
    best.sort()
    relabel = {old: new for new, old in enumerate(best)}
    out = Graph(len(best))
    for old in best:
        for j in g.neighbors(old):
            if old < j and j in relabel:
                out.add_edge(relabel[old], relabel[j])
    return out


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _random_block_rows(g: Graph, row_probs, rng: np.random.Generator) -> None:
    # row_probs(i) yields (start, stop, p) column segments with stop > start > i
    n = g.node_count
    for i in range(n):
        for start, stop, p in row_probs(i):
            if stop <= start or p <= 0.0:
                continue
            draws = rng.random(stop - start)
            for j in np.flatnonzero(draws < p):
                g.add_edge(i, start + int(j))


def generate_er(n: int, avg_degree: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) with p chosen to hit the target mean degree."""
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if not 0 < avg_degree <= n - 1:  # avg_degree == n-1 forces p = 1
        raise ParameterError(f"avg_degree must lie in (0, n-1], got {avg_degree}")
    p = avg_degree / (n - 1)
    g = Graph(n)
    rng = np.random.default_rng(seed)
    _random_block_rows(g, lambda i: [(i + 1, n, p)], rng)
    return g


def generate_sbm(sizes: tuple[int, int], p_in: float, p_out: float, seed: int) -> Graph:
    """Two-block stochastic block model: p_in within blocks, p_out across."""
    s0, s1 = int(sizes[0]), int(sizes[1])
    if s0 < 0 or s1 < 0 or s0 + s1 < 2:
        raise ParameterError(f"block sizes must be non-negative and sum to >= 2, got {sizes}")
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{name} must be in [0, 1], got {p}")
    n = s0 + s1
    g = Graph(n)
    rng = np.random.default_rng(seed)

    def rows(i):
        if i < s0:
            return [(i + 1, s0, p_in), (s0, n, p_out)]
        return [(i + 1, n, p_in)]

    _random_block_rows(g, rows, rng)
    return g


def generate_lattice2d(side: int) -> Graph:
    """side x side torus with von Neumann neighborhoods (every degree is 4)."""
    if side < 3:
        raise ParameterError(f"need side >= 3 (wrap-around duplicates below), got {side}")
    g = Graph(side * side)
    for r in range(side):
        for c in range(side):
            i = r * side + c
            g.add_edge(i, r * side + (c + 1) % side)
            g.add_edge(i, ((r + 1) % side) * side + c)
    return g


_MATCH_RESTARTS = 1000


def _stub_match(degrees: np.ndarray,
                rng: np.random.Generator) -> list[tuple[int, int]]:
    """Pair stubs into a simple edge set, rejecting self-loops/duplicates.

    Invalid pairings are repaired by re-drawing a partner; a dead end (no
    valid partner remains) restarts the whole matching.  Gives up after
    `_MATCH_RESTARTS` restarts.
    """
    if int(degrees.sum()) % 2 != 0:
        raise ParameterError("degree sum must be even for stub matching")
    base = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    for _ in range(_MATCH_RESTARTS):
        stubs = base.copy()
        rng.shuffle(stubs)
        stubs = stubs.tolist()
        edges: set[tuple[int, int]] = set()
        out: list[tuple[int, int]] = []
        dead_end = False
        while stubs:
            u = stubs.pop()
            pos = -1
            for _try in range(24):
                cand = int(rng.integers(len(stubs)))
                v = stubs[cand]
                key = (u, v) if u < v else (v, u)
                if v != u and key not in edges:
                    pos = cand
                    break
            if pos < 0:  # fall back to a linear scan before declaring a dead end
                for cand, v in enumerate(stubs):
                    key = (u, v) if u < v else (v, u)
                    if v != u and key not in edges:
                        pos = cand
                        break
            if pos < 0:
                dead_end = True
                break
            v = stubs[pos]
            stubs[pos] = stubs[-1]
            stubs.pop()
            key = (u, v) if u < v else (v, u)
            edges.add(key)
            out.append(key)
        if not dead_end:
            return out
    raise GenerationError(
        f"stub matching failed to produce a simple graph after {_MATCH_RESTARTS} restarts"
    )


def generate_rrg(n: int, k: int, seed: int) -> Graph:
    """Random regular graph: every node has degree exactly k."""
    if k < 0 or k >= n:
        raise ParameterError(f"need 0 <= k < n, got k={k}, n={n}")
    if (n * k) % 2 != 0:
        raise ParameterError(f"n*k must be even, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    degrees = np.full(n, k, dtype=np.int64)
    return Graph.from_edges(n, _stub_match(degrees, rng))


def truncated_powerlaw_mean(gamma: float, k_min: int, k_max: int) -> float:
    """Exact mean of P(k) proportional to k^-gamma on the integers [k_min, k_max]."""
    ks = np.arange(k_min, k_max + 1, dtype=np.float64)
    w = ks ** -gamma
    return float((ks * w).sum() / w.sum())


def sample_powerlaw_degrees(n: int, gamma: float, k_min: int, k_max: int,
                            rng: np.random.Generator) -> np.ndarray:
    """n degrees from the truncated power law, with the sum forced even."""
    ks = np.arange(k_min, k_max + 1, dtype=np.int64)
    w = ks.astype(np.float64) ** -gamma
    degrees = rng.choice(ks, size=n, p=w / w.sum())
    if int(degrees.sum()) % 2 != 0:
        idx = int(rng.integers(n))
        degrees[idx] += 1 if degrees[idx] < k_max else -1
    return degrees


def generate_powerlaw_config(n: int, gamma: float, k_min: int, k_max: int,
                             seed: int) -> Graph:
    """Configuration model with a truncated power-law degree sequence."""
    if gamma <= 1:
        raise ParameterError(f"need gamma > 1, got {gamma}")
    if not 1 <= k_min <= k_max < n:
        raise ParameterError(
            f"need 1 <= k_min <= k_max < n, got k_min={k_min}, k_max={k_max}, n={n}"
        )
    rng = np.random.default_rng(seed)
    degrees = sample_powerlaw_degrees(n, gamma, k_min, k_max, rng)
    return Graph.from_edges(n, _stub_match(degrees, rng))


def _pick_k_min_for_mean(gamma: float, k_max: int, avg_degree: float) -> int:
    best, best_err = 1, float("inf")
    for k_min in range(1, k_max + 1):
        err = abs(truncated_powerlaw_mean(gamma, k_min, k_max) - avg_degree)
        if err < best_err:
            best, best_err = k_min, err
    return best


def generate_lfr(n: int, mu: float, degree_exponent: float = 2.2,
                 avg_degree: float = 8.0, k_max: int = 40,
                 communities: int = 2, seed: int = 0) -> Graph:
    """Two-community LFR-style benchmark graph.

    Power-law degrees (exponent `degree_exponent`, cutoff `k_max`, lower
    cutoff solved to match `avg_degree`), two equal-size communities, and a
    per-node external-edge fraction of `mu` applied with stochastic rounding
    so the realized mixing is unbiased.  Community membership is by node id:
    the first half of the ids forms one community.
    """
    if communities != 2:
        raise ParameterError(f"only the two-community variant is implemented, got {communities}")
    if not 0.0 <= mu <= 1.0:
        raise ParameterError(f"mu must be in [0, 1], got {mu}")
    if degree_exponent <= 1:
        raise ParameterError(f"need degree_exponent > 1, got {degree_exponent}")
    if n < 4:
        raise ParameterError(f"need n >= 4, got {n}")
    k_max = min(k_max, n - 1)
    rng = np.random.default_rng(seed)
    k_min = _pick_k_min_for_mean(degree_exponent, k_max, avg_degree)
    degrees = sample_powerlaw_degrees(n, degree_exponent, k_min, k_max, rng)

    half = n // 2
    members = (np.arange(0, half), np.arange(half, n))

    # External degree per node: stochastic rounding of mu * k keeps the
    # expected mixing exactly mu even when mu * k < 1.
    ext = np.floor(mu * degrees).astype(np.int64)
    frac = mu * degrees - ext
    ext += (rng.random(n) < frac).astype(np.int64)
    ext = np.minimum(ext, degrees)

    # The two external-stub totals must agree, and each community's internal
    # total must be even; both hold when the common total E matches the
    # parity of the block degree sums (which agree because the grand total
    # is even).
    sum_k0 = int(degrees[members[0]].sum())
    cap = min(int(degrees[members[0]].sum()), int(degrees[members[1]].sum()))
    target = min(int(round((ext[members[0]].sum() + ext[members[1]].sum()) / 2)), cap)
    if (sum_k0 - target) % 2 != 0:
        target = target + 1 if target + 1 <= cap else target - 1
    if target < 0:
        raise GenerationError("no feasible external-stub total for this degree draw")
    for side in members:
        deficit = target - int(ext[side].sum())
        guard = 0
        while deficit != 0:
            guard += 1
            if guard > 100 * n:
                raise GenerationError("could not balance external stubs between communities")
            i = int(side[rng.integers(len(side))])
            if deficit > 0 and ext[i] < degrees[i]:
                ext[i] += 1
                deficit -= 1
            elif deficit < 0 and ext[i] > 0:
                ext[i] -= 1
                deficit += 1

    edges: list[tuple[int, int]] = []
    internal = degrees - ext
    for side in members:
        deg_side = np.zeros(n, dtype=np.int64)
        deg_side[side] = internal[side]
        edges.extend(_stub_match(deg_side, rng))

    # Cross edges: walk the A stubs against a shuffled B stub list, swapping
    # in a later B stub whenever the proposed pair already exists.
    stubs_a = np.repeat(members[0], ext[members[0]])
    stubs_b = np.repeat(members[1], ext[members[1]])
    for _ in range(_MATCH_RESTARTS):
        rng.shuffle(stubs_a)
        rng.shuffle(stubs_b)
        sb = stubs_b.tolist()
        cross: set[tuple[int, int]] = set()
        ok = True
        for idx, a in enumerate(stubs_a.tolist()):
            pos = -1
            remaining = len(sb) - idx
            for _try in range(24):
                cand = idx + int(rng.integers(remaining))
                if (a, sb[cand]) not in cross:
                    pos = cand
                    break
            if pos < 0:
                for cand in range(idx, len(sb)):
                    if (a, sb[cand]) not in cross:
                        pos = cand
                        break
            if pos < 0:
                ok = False
                break
            sb[idx], sb[pos] = sb[pos], sb[idx]
            cross.add((a, sb[idx]))
        if ok:
            edges.extend(cross)
            return Graph.from_edges(n, edges)
    raise GenerationError("cross-community stub pairing kept producing duplicate edges")


# ---------------------------------------------------------------------------
# Generator dispatch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameter bundle naming a graph family plus its knobs.

    Only the fields relevant to `kind` are consulted; `build(seed)` performs
    the dispatch so sweep tasks can regenerate graphs from a seed alone.
    """

    kind: str  # er | sbm | lattice2d | rrg | powerlaw | lfr
    n: int = 1000
    avg_degree: float = 8.0
    sizes: tuple[int, int] = (500, 500)
    p_in: float = 8.0 / 499.0
    p_out: float = 8e-5
    side: int = 32
    k: int = 8
    gamma: float = 2.2
    k_min: int = 4
    k_max: int = 40
    mu: float = 0.1
    communities: int = 2
    extra: dict = field(default_factory=dict, compare=False)

    def build(self, seed: int) -> Graph:
        if self.kind == "er":
            return generate_er(self.n, self.avg_degree, seed)
        if self.kind == "sbm":
            return generate_sbm(self.sizes, self.p_in, self.p_out, seed)
        if self.kind == "lattice2d":
            return generate_lattice2d(self.side)
        if self.kind == "rrg":
            return generate_rrg(self.n, self.k, seed)
        if self.kind == "powerlaw":
            return generate_powerlaw_config(self.n, self.gamma, self.k_min, self.k_max, seed)
        if self.kind == "lfr":
            return generate_lfr(self.n, self.mu, self.gamma, self.avg_degree,
                                self.k_max, self.communities, seed)
        raise ParameterError(f"unknown generator kind {self.kind!r}")

    def describe(self) -> tuple[str, int, float]:
        """(topology label, node count, nominal mean degree) for run records."""
        if self.kind == "sbm":
            n = sum(self.sizes)
            avg = self.p_in * (self.sizes[0] - 1)
            return "sbm", n, avg
        if self.kind == "lattice2d":
            return "lattice2d", self.side * self.side, 4.0
        if self.kind == "rrg":
            return "rrg", self.n, float(self.k)
        if self.kind == "powerlaw":
            return "powerlaw", self.n, truncated_powerlaw_mean(self.gamma, self.k_min, self.k_max)
        return self.kind, self.n, self.avg_degree
