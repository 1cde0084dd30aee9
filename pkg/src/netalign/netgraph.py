"""Delay networks, local encoding kernels and transfer polynomials.

A network is a DAG whose edges each carry one field symbol per use and delay
it by a positive integer number of time steps.  Source ``S_i`` and
destination ``T_j`` are addressed with 1-based indices ``i, j in {1, 2, 3}``
throughout, matching how transfer functions ``M_ij`` are usually written.

Delay convention: a symbol formed at ``tail(e)`` at time ``t`` is observable
at ``head(e)`` at time ``t + delay(e)``; sink readout adds no delay.  The
total delay of a path is therefore the sum of its edge delays.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path

import numpy as np

from netalign.galois import FieldCtx

PAIRS = tuple(product((1, 2, 3), repeat=2))
MAX_ORACLE_PATHS = 100_000


class NetworkError(ValueError):
    """The network description is structurally invalid."""


class CycleError(NetworkError):
    pass


class ZeroMinCutError(NetworkError):
    """Some required ``S_i -> T_j`` pair has no connecting path."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        names = ", ".join(f"S{i}->T{j}" for i, j in self.missing)
        super().__init__(f"zero min-cut (no path) for {names}")


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    delay: int


@dataclass(frozen=True)
class DelayNetwork:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    sources: tuple[str, str, str]
    destinations: tuple[str, str, str]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "destinations", tuple(self.destinations))
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("duplicate node identifiers")
        if len(self.sources) != 3 or len(self.destinations) != 3:
            raise NetworkError("exactly three sources and three destinations are required")
        terminals = self.sources + self.destinations
        if len(set(terminals)) != 6:
            raise NetworkError("sources and destinations must be six distinct nodes")
        known = set(self.nodes)
        for t in terminals:
            if t not in known:
                raise NetworkError(f"terminal {t!r} is not a node")
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise NetworkError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            if e.tail not in known or e.head not in known:
                raise NetworkError(f"edge {e.id!r} references an unknown node")
            if e.tail == e.head:
                raise CycleError(f"edge {e.id!r} is a self-loop")
            if not isinstance(e.delay, int) or isinstance(e.delay, bool) or e.delay < 1:
                raise NetworkError(f"edge {e.id!r} must have a positive integer delay")

    # ---- adjacency ----

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        acc = defaultdict(list)
        for e in self.edges:
            acc[e.head].append(e)
        return {v: tuple(acc[v]) for v in self.nodes}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        acc = defaultdict(list)
        for e in self.edges:
            acc[e.tail].append(e)
        return {v: tuple(acc[v]) for v in self.nodes}

    @cached_property
    def topo_nodes(self) -> tuple[str, ...]:
        """Kahn's algorithm; ties broken by declaration order."""
        indeg = {v: len(self.in_edges[v]) for v in self.nodes}
        ready = [v for v in self.nodes if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for e in self.out_edges[v]:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
        if len(order) != len(self.nodes):
            stuck = sorted(v for v in self.nodes if indeg[v] > 0)
            raise CycleError(f"network has a directed cycle through {stuck}")
        return tuple(order)

    @cached_property
    def topo_edges(self) -> tuple[Edge, ...]:
        rank = {v: n for n, v in enumerate(self.topo_nodes)}
        return tuple(sorted(self.edges, key=lambda e: rank[e.tail]))

    def source_index(self, node: str) -> int | None:
        return self.sources.index(node) + 1 if node in self.sources else None

    def sink_index(self, node: str) -> int | None:
        return self.destinations.index(node) + 1 if node in self.destinations else None

    @cached_property
    def adjacent_pairs(self) -> tuple[tuple[str, str], ...]:
        """All ``(e', e)`` with ``head(e') == tail(e)``, i.e. where relay LEKs live."""
        return tuple(
            (ein.id, eout.id)
            for eout in self.edges
            for ein in self.in_edges[eout.tail]
        )

    # ---- (de)serialisation ----

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"id": e.id, "tail": e.tail, "head": e.head, "delay": e.delay}
                for e in self.edges
            ],
            "sources": list(self.sources),
            "destinations": list(self.destinations),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DelayNetwork":
        from netalign.schema import check_network_document

        check_network_document(doc)
        return cls(
            nodes=tuple(doc["nodes"]),
            edges=tuple(Edge(e["id"], e["tail"], e["head"], e["delay"]) for e in doc["edges"]),
            sources=tuple(doc["sources"]),
            destinations=tuple(doc["destinations"]),
        )


def load_network(path: str | Path) -> DelayNetwork:
    with open(path) as fh:
        doc = json.load(fh)
    return DelayNetwork.from_dict(doc)


def dump_network(net: DelayNetwork) -> str:
    return json.dumps(net.to_dict(), indent=2) + "\n"


# ---- connectivity and delays ----

@dataclass(frozen=True)
class Connectivity:
    """3x3 reachability; ``matrix[i-1][j-1]`` is true iff ``S_i -> T_j`` exists."""

    matrix: tuple[tuple[bool, bool, bool], ...]

    def connected(self, i: int, j: int) -> bool:
        return self.matrix[i - 1][j - 1]

    @property
    def missing(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in PAIRS if not self.connected(i, j)]

    @property
    def zero_min_cut(self) -> bool:
        """Some off-diagonal pair is disconnected (unsupported regime)."""
        return bool(self.missing)


def _reachable(net: DelayNetwork, start: str) -> set[str]:
    seen = set()
    stack = [e.head for e in net.out_edges[start]]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(e.head for e in net.out_edges[v])
    return seen


def validate(net: DelayNetwork) -> Connectivity:
    """Check acyclicity and diagonal connectivity, return the 3x3 reachability.

    Raises :class:`CycleError` on cycles and :class:`NetworkError` when some
    ``S_i`` cannot reach ``T_i``.  Missing off-diagonal pairs are reported via
    :attr:`Connectivity.zero_min_cut`, not raised.
    """
    net.topo_nodes  # raises on cycles
    reach = [_reachable(net, s) for s in net.sources]
    matrix = tuple(tuple(t in reach[i] for t in net.destinations) for i in range(3))
    conn = Connectivity(matrix)
    bad = [i for i in (1, 2, 3) if not conn.connected(i, i)]
    if bad:
        raise NetworkError(
            "no path from " + ", ".join(f"S{i} to T{i}" for i in bad)
        )
    return conn


def _edge_delay_bounds(net: DelayNetwork, i: int) -> dict[str, tuple[float, float]]:
    """Min/max delay over paths that start at ``S_i`` and end with each edge."""
    src = net.sources[i - 1]
    bounds: dict[str, tuple[float, float]] = {}
    for e in net.topo_edges:
        lo, hi = (0, 0) if e.tail == src else (np.inf, -np.inf)
        for ein in net.in_edges[e.tail]:
            if ein.id in bounds:
                blo, bhi = bounds[ein.id]
                lo, hi = min(lo, blo), max(hi, bhi)
        if lo != np.inf:
            bounds[e.id] = (lo + e.delay, hi + e.delay)
    return bounds


def pair_delay_bounds(net: DelayNetwork) -> dict[tuple[int, int], tuple[int, int]]:
    """Shortest and longest total path delay for every connected pair."""
    out = {}
    for i in (1, 2, 3):
        bounds = _edge_delay_bounds(net, i)
        for j in (1, 2, 3):
            ends = [bounds[e.id] for e in net.in_edges[net.destinations[j - 1]] if e.id in bounds]
            if ends:
                out[i, j] = (int(min(b[0] for b in ends)), int(max(b[1] for b in ends)))
    return out


def delay_extrema(net: DelayNetwork) -> tuple[int, int]:
    """Global ``(delta_min, d_max)`` over all connected ``(i, j)`` pairs.

    ``delta_min`` is the smallest path delay anywhere; ``d_max`` is the largest
    path delay minus ``delta_min``.  Both come from shortest/longest path DP on
    the DAG, never from enumerating paths.
    """
    bounds = pair_delay_bounds(net)
    if not bounds:
        raise NetworkError("no source reaches any destination")
    lo = min(b[0] for b in bounds.values())
    hi = max(b[1] for b in bounds.values())
    return lo, hi - lo


# ---- local encoding kernels ----

@dataclass(frozen=True)
class LekAssignment:
    """One value per local encoding kernel.

    ``source[(i, e)]`` feeds ``X_i`` onto edge ``e`` leaving ``S_i``;
    ``relay[(e_in, e_out)]`` combines adjacent edges;
    ``sink[(e, j)]`` reads edge ``e`` into the output of ``T_j``.
    Missing keys mean zero.
    """

    source: dict[tuple[int, str], int] = field(default_factory=dict)
    relay: dict[tuple[str, str], int] = field(default_factory=dict)
    sink: dict[tuple[str, int], int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source": [[i, e, v] for (i, e), v in self.source.items()],
            "relay": [[a, b, v] for (a, b), v in self.relay.items()],
            "sink": [[e, j, v] for (e, j), v in self.sink.items()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LekAssignment":
        return cls(
            {(i, e): v for i, e, v in doc["source"]},
            {(a, b): v for a, b, v in doc["relay"]},
            {(e, j): v for e, j, v in doc["sink"]},
        )


def lek_keys(net: DelayNetwork):
    """The kernel slots of ``net`` in a fixed, reproducible order."""
    src = [(net.source_index(e.tail), e.id) for e in net.edges if e.tail in net.sources]
    sink = [(e.id, net.sink_index(e.head)) for e in net.edges if e.head in net.destinations]
    return src, list(net.adjacent_pairs), sink


def random_leks(net: DelayNetwork, ctx: FieldCtx, rng: np.random.Generator) -> LekAssignment:
    """Independent uniform draws over the whole field (zero included)."""
    src, rel, sink = lek_keys(net)
    vals = ctx.random(rng, size=len(src) + len(rel) + len(sink)).tolist()
    a, b = len(src), len(src) + len(rel)
    return LekAssignment(
        dict(zip(src, vals[:a])),
        dict(zip(rel, vals[a:b])),
        dict(zip(sink, vals[b:])),
    )


def constant_leks(net: DelayNetwork, value: int = 1) -> LekAssignment:
    src, rel, sink = lek_keys(net)
    return LekAssignment(
        {k: value for k in src}, {k: value for k in rel}, {k: value for k in sink}
    )


# ---- transfer polynomials ----

@dataclass(frozen=True)
class TransferPoly:
    """``M_ij(D) = sum_d coeffs[d] D^d``; ``coeffs[d]`` gathers paths of delay ``d + shift``."""

    pair: tuple[int, int]
    coeffs: tuple[int, ...]
    shift: int

    @property
    def d_max(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def eval_transfer(ctx: FieldCtx, tp: TransferPoly, x: int) -> int:
    """Horner evaluation of ``tp`` at ``x``."""
    acc = 0
    for c in reversed(tp.coeffs):
        acc = ctx.mul(acc, x) ^ c
    return acc


def _propagate(net: DelayNetwork, ctx: FieldCtx, leks: LekAssignment, i: int, length: int):
    """Delay-indexed transfer from ``X_i`` to every edge, one topological pass."""
    src = net.sources[i - 1]
    polys: dict[str, np.ndarray] = {}
    for e in net.topo_edges:
        acc = np.zeros(length, dtype=np.int64)
        if e.tail == src:
            acc[0] ^= leks.source.get((i, e.id), 0)
        for ein in net.in_edges[e.tail]:
            g = leks.relay.get((ein.id, e.id), 0)
            if g and ein.id in polys:
                acc ^= ctx.mul_arr(polys[ein.id], g)
        if not acc.any():
            continue
        shifted = np.zeros(length, dtype=np.int64)
        if e.delay < length:
            shifted[e.delay:] = acc[: length - e.delay]
        # any mass pushed past ``length`` belongs to paths that cannot reach a sink in range
        polys[e.id] = shifted
    return polys


def _longest_delay(net: DelayNetwork) -> int:
    best: dict[str, int] = {}
    for e in net.topo_edges:
        best[e.id] = e.delay + max((best[x.id] for x in net.in_edges[e.tail]), default=0)
    return max(best.values(), default=0)


def transfer_polys(net: DelayNetwork, ctx: FieldCtx, leks: LekAssignment,
                   extrema: tuple[int, int] | None = None) -> dict[tuple[int, int], TransferPoly]:
    """All nine ``M_ij(D)`` from three dynamic-programming passes."""
    delta, dmax = extrema if extrema is not None else delay_extrema(net)
    length = _longest_delay(net) + 1
    out = {}
    for i in (1, 2, 3):
        polys = _propagate(net, ctx, leks, i, length)
        for j in (1, 2, 3):
            acc = np.zeros(length, dtype=np.int64)
            for e in net.in_edges[net.destinations[j - 1]]:
                g = leks.sink.get((e.id, j), 0)
                if g and e.id in polys:
                    acc ^= ctx.mul_arr(polys[e.id], g)
            window = acc[delta: delta + dmax + 1]
            assert not acc[:delta].any() and not acc[delta + dmax + 1:].any(), (
                f"path delay of S{i}->T{j} outside [delta_min, delta_min + d_max]"
            )
            out[i, j] = TransferPoly((i, j), tuple(int(c) for c in window), delta)
    return out


def transfer_poly(net: DelayNetwork, ctx: FieldCtx, leks: LekAssignment, i: int, j: int,
                  extrema: tuple[int, int] | None = None) -> TransferPoly:
    return transfer_polys(net, ctx, leks, extrema)[i, j]


@dataclass(frozen=True)
class PathRecord:
    edges: tuple[str, ...]
    gain: int
    delay: int


def enumerate_paths(net: DelayNetwork, i: int, j: int,
                    limit: int = MAX_ORACLE_PATHS) -> list[tuple[Edge, ...]]:
    """Every ``S_i -> T_j`` path as an edge tuple, by depth-first search."""
    src, dst = net.sources[i - 1], net.destinations[j - 1]
    found: list[tuple[Edge, ...]] = []
    stack: list[tuple[Edge, ...]] = [(e,) for e in reversed(net.out_edges[src])]
    while stack:
        path = stack.pop()
        last = path[-1]
        if last.head == dst:
            found.append(path)
            if len(found) > limit:
                raise OverflowError(f"more than {limit} paths from S{i} to T{j}")
            continue
        for e in reversed(net.out_edges[last.head]):
            stack.append(path + (e,))
    return found


def path_record(ctx: FieldCtx, leks: LekAssignment, i: int, j: int,
                path: tuple[Edge, ...]) -> PathRecord:
    gain = leks.source.get((i, path[0].id), 0)
    for a, b in zip(path, path[1:]):
        gain = ctx.mul(gain, leks.relay.get((a.id, b.id), 0))
    gain = ctx.mul(gain, leks.sink.get((path[-1].id, j), 0))
    return PathRecord(tuple(e.id for e in path), gain, sum(e.delay for e in path))


def transfer_oracle(net: DelayNetwork, ctx: FieldCtx, leks: LekAssignment, i: int, j: int,
                    extrema: tuple[int, int] | None = None,
                    limit: int = MAX_ORACLE_PATHS) -> TransferPoly:
    """Reference ``M_ij(D)`` as an explicit sum of path gains (test oracle only)."""
    delta, dmax = extrema if extrema is not None else delay_extrema(net)
    coeffs = [0] * (dmax + 1)
    for path in enumerate_paths(net, i, j, limit):
        rec = path_record(ctx, leks, i, j, path)
        coeffs[rec.delay - delta] ^= rec.gain
    return TransferPoly((i, j), tuple(coeffs), delta)
