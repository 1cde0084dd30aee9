"""Time-domain network evaluation and the end-to-end block transmission pipeline.

Time runs from ``-d_max``.  LEK block ``l`` (0-based here) covers the instants
``[-d_max + l (k + d_max), -d_max + (l + 1)(k + d_max) - 1]``: a cyclic prefix
of ``d_max`` symbols followed by ``k`` payload symbols.

Two LEK timing rules are supported by :func:`run_time_domain`:

``"generation"`` (default)
    A symbol is combined with the kernels of the block in which it left its
    source.  Blocks are then exactly isolated by the cyclic prefix, for any
    delays.
``"encoding"``
    Every node uses the block in force at its own encoding instant (a
    wall-clock switch).  Symbols still in flight when the block changes pick
    up the next block's kernels, so isolation is exact only when every
    contributing path stays inside one block window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from netalign.alignment import (
    LekSchedule,
    PrecodeSet,
    ToneChannel,
    build_precoders,
    channel_output,
    check_alignment,
    decode,
    draw_schedule,
)
from netalign.feasibility import check_supported
from netalign.galois import DivisibilityError, FieldCtx, dft_matrix, make_field, matmul, root_of_unity
from netalign.netgraph import DelayNetwork, LekAssignment, delay_extrema
from netalign.transform import add_cp, strip_cp

TIMINGS = ("generation", "encoding")


class FramingError(AssertionError):
    """Received tone vectors disagree with the per-tone channel model."""


@dataclass
class TimeTrace:
    """Symbol timelines; index ``n`` of every array is time ``t_start + n``."""

    t_start: int
    edges: dict[str, np.ndarray]
    outputs: dict[int, np.ndarray]

    def at(self, j: int, t: int) -> int:
        return int(self.outputs[j][t - self.t_start])

    @property
    def t_stop(self) -> int:
        return self.t_start + len(next(iter(self.outputs.values())))


def block_index(t: np.ndarray, k: int, d_max: int, blocks: int) -> np.ndarray:
    """LEK block in force at each instant, clamped to the schedule."""
    return np.clip((t + d_max) // (k + d_max), 0, blocks - 1)


def _evaluate(net: DelayNetwork, ctx: FieldCtx, coef, inputs: dict[int, np.ndarray], length: int):
    """One causal pass over the DAG; ``coef(kind, key)`` gives a scalar or a per-instant array."""
    edges: dict[str, np.ndarray] = {}
    for e in net.topo_edges:
        formed = np.zeros(length, dtype=np.int64)
        i = net.source_index(e.tail)
        if i is not None and i in inputs:
            formed ^= ctx.mul_arr(inputs[i], coef("source", (i, e.id)))
        for ein in net.in_edges[e.tail]:
            formed ^= ctx.mul_arr(edges[ein.id], coef("relay", (ein.id, e.id)))
        z = np.zeros(length, dtype=np.int64)
        if e.delay < length:
            z[e.delay:] = formed[: length - e.delay]
        edges[e.id] = z
    outputs = {}
    for j, dst in enumerate(net.destinations, start=1):
        y = np.zeros(length, dtype=np.int64)
        for e in net.in_edges[dst]:
            y ^= ctx.mul_arr(edges[e.id], coef("sink", (e.id, j)))
        outputs[j] = y
    return edges, outputs


def _table(leks: LekAssignment, kind: str):
    return getattr(leks, kind)


def run_time_domain(net: DelayNetwork, ctx: FieldCtx, sched: LekSchedule,
                    inputs: dict[int, np.ndarray], d_max: int | None = None,
                    timing: str = "generation") -> TimeTrace:
    """Evaluate every edge and destination symbol over the input time range.

    ``inputs[i]`` is the timeline of ``S_i`` starting at ``t = -d_max``; all
    timelines share one length, which must cover the whole schedule.
    Instants before ``-d_max`` are treated as silent.
    """
    if timing not in TIMINGS:
        raise ValueError(f"timing must be one of {TIMINGS}")
    if d_max is None:
        d_max = delay_extrema(net)[1]
    lengths = {len(x) for x in inputs.values()}
    if len(lengths) != 1:
        raise ValueError("all source timelines must have the same length")
    length = lengths.pop()
    nblocks = len(sched.blocks)
    if length < nblocks * (sched.k + d_max):
        raise ValueError(
            f"timeline of {length} instants does not cover {nblocks} blocks of {sched.k + d_max}"
        )
    t = np.arange(length) - d_max
    which = block_index(t, sched.k, d_max, nblocks)
    inputs = {i: np.asarray(x, dtype=np.int64) for i, x in inputs.items()}

    if timing == "encoding":
        def coef(kind, key):
            per_block = np.array([_table(b, kind).get(key, 0) for b in sched.blocks], dtype=np.int64)
            return per_block[which]

        edges, outputs = _evaluate(net, ctx, coef, inputs, length)
        return TimeTrace(-d_max, edges, outputs)

    edges = {e.id: np.zeros(length, dtype=np.int64) for e in net.edges}
    outputs = {j: np.zeros(length, dtype=np.int64) for j in (1, 2, 3)}
    for l, leks in enumerate(sched.blocks):
        part = {i: np.where(which == l, x, 0) for i, x in inputs.items()}
        if not any(p.any() for p in part.values()):
            continue
        e_l, y_l = _evaluate(net, ctx, lambda kind, key: _table(leks, kind).get(key, 0), part, length)
        for key in edges:
            edges[key] ^= e_l[key]
        for j in outputs:
            outputs[j] ^= y_l[j]
    return TimeTrace(-d_max, edges, outputs)


@dataclass(frozen=True)
class PipelineConfig:
    n: int
    k: int
    m: int = 16
    seed: int = 0
    tones: tuple[int, ...] | None = None
    include_zero: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.k < 1 or ((1 << self.m) - 1) % self.k:
            raise DivisibilityError(
                f"block length k={self.k} does not divide 2^{self.m} - 1 = {(1 << self.m) - 1}"
            )
        if self.tones is not None and any(not 0 <= p < self.k for p in self.tones):
            raise ValueError(f"tones must lie in 0..{self.k - 1}")

    @property
    def decode_tones(self) -> tuple[int, ...]:
        if self.tones is not None:
            return tuple(sorted(set(self.tones)))
        start = 0 if self.include_zero else 1
        return tuple(range(start, self.k))

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "m": self.m, "seed": self.seed,
                "tones": list(self.decode_tones)}


@dataclass
class SimResult:
    config: PipelineConfig
    delta_min: int
    d_max: int
    transmitted: dict[int, dict[int, list[int]]]
    recovered: dict[int, dict[int, list[int] | None]] = field(default_factory=dict)
    success: dict[tuple[int, int], bool] = field(default_factory=dict)
    ranks: dict[tuple[int, int], int] = field(default_factory=dict)
    aligned: dict[int, bool] = field(default_factory=dict)
    model_mismatches: list[tuple[int, int]] = field(default_factory=list)
    miscorrections: list[tuple[int, int]] = field(default_factory=list)
    # per-tone channels and precoders, kept for inspection; not serialised
    channels: dict[int, ToneChannel] = field(default_factory=dict, repr=False)
    precoders: dict[int, PrecodeSet] = field(default_factory=dict, repr=False)
    received: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def model_ok(self) -> bool:
        return not self.model_mismatches

    def decoded_symbols(self, i: int) -> int:
        return sum(len(self.transmitted[i][p]) for p in self.config.decode_tones if self.success.get((i, p)))

    def to_dict(self) -> dict:
        tp = throughput(self)
        return {
            "config": self.config.to_dict(),
            "delta_min": self.delta_min,
            "d_max": self.d_max,
            "model_ok": self.model_ok,
            "model_mismatches": [list(x) for x in self.model_mismatches],
            "tones": [
                {
                    "p": p,
                    "aligned": self.aligned.get(p),
                    "destinations": [
                        {"i": i, "success": self.success[i, p], "rank": self.ranks[i, p]}
                        for i in (1, 2, 3)
                    ],
                }
                for p in self.config.decode_tones
            ],
            "decoded_symbols": {str(i): self.decoded_symbols(i) for i in (1, 2, 3)},
            "throughput": {
                str(i): {kind: str(v) for kind, v in tp[i].items()} for i in (1, 2, 3)
            },
            "miscorrections": [list(x) for x in self.miscorrections],
        }


def throughput(sr: SimResult) -> dict[int, dict[str, Fraction]]:
    """Recovered symbols per channel use, per source-destination pair.

    ``payload`` divides by the ``k (2n + 1)`` payload instants; ``wall_clock``
    also counts the cyclic prefixes, ``(2n + 1)(k + d_max)`` instants.
    """
    n, k = sr.config.n, sr.config.k
    uses = k * (2 * n + 1)
    wall = (2 * n + 1) * (k + sr.d_max)
    return {
        i: {"payload": Fraction(sr.decoded_symbols(i), uses), "wall_clock": Fraction(sr.decoded_symbols(i), wall)}
        for i in (1, 2, 3)
    }


def frame_blocks(ctx: FieldCtx, F: np.ndarray, blocks: np.ndarray, d_max: int) -> np.ndarray:
    """Transform and cyclic-prefix each row of ``blocks`` (descending layout) into one timeline."""
    out = []
    for pre in blocks:
        desc = matmul(ctx, F, pre)
        out.append(add_cp(desc[::-1], d_max))
    return np.concatenate(out)


def unframe_blocks(ctx: FieldCtx, F_inv: np.ndarray, timeline: np.ndarray, nblocks: int,
                   k: int, d_max: int, delta_min: int) -> np.ndarray:
    """Inverse of :func:`frame_blocks` at a receiver whose output lags by ``delta_min``."""
    rows = []
    for l in range(nblocks):
        start = l * (k + d_max) + delta_min
        asc = strip_cp(timeline[start: start + k + d_max], d_max, k)
        rows.append(matmul(ctx, F_inv, asc[::-1]))
    return np.stack(rows)


def pbna_pipeline(net: DelayNetwork, cfg: PipelineConfig, schedule: LekSchedule | None = None,
                  timing: str = "generation", strict: bool = True) -> SimResult:
    """Precode, transform, frame, transmit, unframe and decode one super-block.

    All ``k`` tones carry precoded symbols; only ``cfg.decode_tones`` are
    decoded.  Every tone's received vector is compared with the per-tone
    channel model and a mismatch raises :class:`FramingError` when ``strict``.
    The caller is responsible for checking feasibility beforehand.
    """
    ctx = make_field(cfg.m)
    root = root_of_unity(ctx, cfg.k)
    F, F_inv = dft_matrix(root)
    check_supported(net)
    delta, d_max = delay_extrema(net)
    if cfg.k < d_max + 1:
        raise ValueError(f"block length k={cfg.k} must be at least d_max + 1 = {d_max + 1}")
    n, k = cfg.n, cfg.k
    size = 2 * n + 1
    rng = np.random.default_rng(cfg.seed)
    all_tones = range(k)

    if schedule is None:
        schedule, _, channels = draw_schedule(net, ctx, root, n, rng, all_tones)
    else:
        from netalign.alignment import block_polys, tone_channel

        polys = block_polys(net, ctx, schedule)
        channels = {p: tone_channel(net, ctx, schedule, p, root, polys) for p in all_tones}
    precoders: dict[int, PrecodeSet] = {p: build_precoders(ctx, channels[p], n) for p in all_tones}

    width = {1: n + 1, 2: n, 3: n}
    symbols = {i: {p: ctx.random(rng, size=width[i]) for p in all_tones} for i in (1, 2, 3)}

    length = size * (k + d_max) + delta + d_max
    inputs = {}
    for i in (1, 2, 3):
        blocks = np.zeros((size, k), dtype=np.int64)
        for p in all_tones:
            blocks[:, p] = matmul(ctx, precoders[p][i], symbols[i][p])
        timeline = np.zeros(length, dtype=np.int64)
        framed = frame_blocks(ctx, F, blocks, d_max)
        timeline[: len(framed)] = framed
        inputs[i] = timeline

    trace = run_time_domain(net, ctx, schedule, inputs, d_max, timing)
    received = {j: unframe_blocks(ctx, F_inv, trace.outputs[j], size, k, d_max, delta) for j in (1, 2, 3)}

    result = SimResult(
        cfg, delta, d_max,
        transmitted={i: {p: [int(v) for v in symbols[i][p]] for p in all_tones} for i in (1, 2, 3)},
        channels=dict(channels), precoders=precoders, received=received,
    )
    for p in all_tones:
        sym_p = {i: symbols[i][p] for i in (1, 2, 3)}
        for j in (1, 2, 3):
            expect = channel_output(ctx, channels[p], precoders[p], sym_p, j)
            if not np.array_equal(received[j][:, p], expect):
                result.model_mismatches.append((j, p))
    if strict and result.model_mismatches:
        raise FramingError(f"received tones disagree with the channel model at (T_j, p) = {result.model_mismatches}")

    for i in (1, 2, 3):
        result.recovered[i] = {}
    for p in cfg.decode_tones:
        tc: ToneChannel = channels[p]
        pc = precoders[p]
        result.aligned[p] = check_alignment(ctx, tc, pc).ok
        dec = decode(ctx, tc, pc, {j: received[j][:, p] for j in (1, 2, 3)})
        for i in (1, 2, 3):
            got = dec.symbols[i]
            result.ranks[i, p] = dec.ranks[i]
            if got is None:
                result.recovered[i][p] = None
                result.success[i, p] = False
                continue
            result.recovered[i][p] = [int(v) for v in got]
            correct = np.array_equal(got, symbols[i][p])
            if not correct:
                result.miscorrections.append((i, p))
            result.success[i, p] = correct
    return result
