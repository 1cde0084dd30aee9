"""Hand-built networks with known algebraic structure, and a random generator.

The constructions route traffic through single bottleneck edges so that
transfer functions factor.  That pins down ratios of the ``M_ij`` regardless
of the LEK values:

``shared_bottleneck``  every pair crosses one edge: ``eta = 1`` and ``b_i = 1``.
``shared_relay``       cross traffic crosses one edge, each ``S_i`` also has a
                       direct edge to ``T_i``: ``eta = 1``, the ``b_i`` vary.
``merged_sources``     ``S_1`` and ``S_2`` share one edge to every destination:
                       ``b_1 = b_2 = 1`` while ``eta`` varies.
``eta_ratio``          ``b_1 = eta / (eta + 1)`` while ``eta`` varies.
"""

from __future__ import annotations

import numpy as np

from netalign.netgraph import DelayNetwork, Edge, NetworkError, validate

SOURCES = ("S1", "S2", "S3")
DESTINATIONS = ("T1", "T2", "T3")


def _net(relays, edges) -> DelayNetwork:
    nodes = SOURCES + tuple(relays) + DESTINATIONS
    return DelayNetwork(nodes, tuple(Edge(*e) for e in edges), SOURCES, DESTINATIONS)


def single_line(delays=(1, 2)) -> DelayNetwork:
    """``S_i -> u_i -> T_i`` for each ``i``, no cross paths."""
    relays, edges = [], []
    for i in (1, 2, 3):
        u = f"u{i}"
        relays.append(u)
        edges += [(f"a{i}", f"S{i}", u, delays[0]), (f"b{i}", u, f"T{i}", delays[1])]
    return _net(relays, edges)


def diagonal_only() -> DelayNetwork:
    return _net((), [(f"d{i}", f"S{i}", f"T{i}", 1) for i in (1, 2, 3)])


def shared_bottleneck(delay: int = 1) -> DelayNetwork:
    edges = [(f"s{i}", f"S{i}", "u", delay) for i in (1, 2, 3)]
    edges.append(("uv", "u", "v", delay))
    edges += [(f"t{j}", "v", f"T{j}", delay) for j in (1, 2, 3)]
    return _net(("u", "v"), edges)


def shared_relay() -> DelayNetwork:
    """Unit delays; direct ``S_i -> T_i`` edges plus three-hop relay paths."""
    net = shared_bottleneck(1)
    direct = tuple(Edge(f"d{i}", f"S{i}", f"T{i}", 1) for i in (1, 2, 3))
    return DelayNetwork(net.nodes, net.edges + direct, SOURCES, DESTINATIONS)


def merged_sources() -> DelayNetwork:
    edges = [
        ("s1", "S1", "u", 1), ("s2", "S2", "u", 2), ("uv", "u", "v", 1),
        ("v1", "v", "T1", 1), ("v2", "v", "T2", 2), ("v3", "v", "T3", 1),
        ("s3", "S3", "w", 1), ("w1", "w", "T1", 2), ("w2", "w", "T2", 1), ("w3", "w", "T3", 1),
    ]
    return _net(("u", "v", "w"), edges)


def eta_ratio() -> DelayNetwork:
    """``x`` merges ``S_1, S_3`` toward ``T_1, T_2``; ``y`` merges ``S_1, S_2`` toward ``T_1, T_3``."""
    edges = [
        ("a", "S1", "x", 1), ("c", "S3", "x", 1), ("xx", "x", "xo", 1),
        ("x1", "xo", "T1", 1), ("x2", "xo", "T2", 2),
        ("b", "S1", "y", 2), ("d", "S2", "y", 1), ("yy", "y", "yo", 1),
        ("y1", "yo", "T1", 1), ("y3", "yo", "T3", 1),
        ("h2", "S2", "T2", 2), ("h3", "S3", "T3", 3),
    ]
    return _net(("x", "xo", "y", "yo"), edges)


PRESETS = {
    "single-line": single_line,
    "diagonal-only": diagonal_only,
    "shared-bottleneck": shared_bottleneck,
    "shared-relay": shared_relay,
    "merged-sources": merged_sources,
    "eta-ratio": eta_ratio,
}


class GenerationError(RuntimeError):
    pass


def generate_network(seed: int = 0, relays: int = 6, edges: int = 20, delays=(1, 3),
                     require: str = "all", retries: int = 100) -> DelayNetwork:
    """Random DAG over ``S1..S3, r0..r{relays-1}, T1..T3``.

    Edges only run forward in that node order, never into a source or out of
    a destination, and never duplicate a node pair.  ``require`` is ``"all"``
    (all nine pairs connected) or ``"diagonal"``.  One attempt plus
    ``retries`` more are made before giving up.
    """
    if require not in ("all", "diagonal"):
        raise ValueError("require must be 'all' or 'diagonal'")
    rng = np.random.default_rng(seed)
    names = list(SOURCES) + [f"r{n}" for n in range(relays)] + list(DESTINATIONS)
    cand = [
        (a, b)
        for x, a in enumerate(names)
        for b in names[x + 1:]
        if a not in DESTINATIONS and b not in SOURCES
    ]
    if edges > len(cand):
        raise GenerationError(f"{edges} edges requested but only {len(cand)} node pairs are available")
    lo, hi = delays
    for _ in range(retries + 1):
        picks = rng.choice(len(cand), size=edges, replace=False)
        pairs = sorted(int(x) for x in picks)
        ds = rng.integers(lo, hi + 1, size=edges)
        net = DelayNetwork(
            tuple(names),
            tuple(Edge(f"e{n}", *cand[x], int(d)) for n, (x, d) in enumerate(zip(pairs, ds))),
            SOURCES,
            DESTINATIONS,
        )
        try:
            conn = validate(net)
        except NetworkError:
            continue
        if require == "diagonal" or not conn.zero_min_cut:
            return net
    raise GenerationError(f"no connected network found in {retries + 1} attempts (seed {seed})")
