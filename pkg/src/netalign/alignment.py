"""Per-tone precoders, alignment checks and zero-forcing decoding.

With LEKs redrawn for each of the ``2n + 1`` blocks, tone ``p`` sees the
diagonal channel ``M_ij^p = diag(M_ij(eps_1, alpha^p), ..., M_ij(eps_2n+1, alpha^p))``.
Diagonal matrices are stored as 1-D arrays of their entries; all products
and inverses below are entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from netalign.galois import FieldCtx, RootOfUnity, SingularMatrixError, matmul, rank, solve
from netalign.netgraph import (
    PAIRS,
    DelayNetwork,
    LekAssignment,
    TransferPoly,
    delay_extrema,
    eval_transfer,
    random_leks,
    transfer_polys,
)

MAX_RESAMPLES = 32
# M_12, M_23, M_31 and M_32 are inverted when forming U, R and S.
INVERTED_PAIRS = ((1, 2), (2, 3), (3, 1), (3, 2))


class DegenerateLekError(ArithmeticError):
    """A transfer value that must be inverted evaluated to zero."""

    def __init__(self, pair, block, p):
        super().__init__(f"M{pair[0]}{pair[1]}(eps_{block + 1}, alpha^{p}) = 0")
        self.pair = pair
        self.block = block
        self.p = p


@dataclass(frozen=True)
class LekSchedule:
    """Kernels for each of the ``2n + 1`` blocks, constant within a block."""

    blocks: tuple[LekAssignment, ...]
    n: int
    k: int

    def __post_init__(self):
        if len(self.blocks) != 2 * self.n + 1:
            raise ValueError(f"expected {2 * self.n + 1} blocks for n={self.n}, got {len(self.blocks)}")


def block_polys(net: DelayNetwork, ctx: FieldCtx, sched: LekSchedule,
                extrema=None) -> list[dict[tuple[int, int], TransferPoly]]:
    extrema = extrema or delay_extrema(net)
    return [transfer_polys(net, ctx, leks, extrema) for leks in sched.blocks]


@dataclass(frozen=True)
class ToneChannel:
    p: int
    diagonals: dict[tuple[int, int], np.ndarray]

    def __getitem__(self, pair) -> np.ndarray:
        return self.diagonals[pair]

    @property
    def size(self) -> int:
        return len(self.diagonals[1, 1])


def tone_channel(net: DelayNetwork, ctx: FieldCtx, sched: LekSchedule, p: int, root: RootOfUnity,
                 polys=None) -> ToneChannel:
    """All nine ``M_ij^p`` diagonals for tone ``p``.

    ``polys`` may carry the per-block transfer polynomials from
    :func:`block_polys` to avoid recomputing them for every tone.
    """
    polys = polys if polys is not None else block_polys(net, ctx, sched)
    x = root.power(p)
    diags = {
        pair: np.array([eval_transfer(ctx, bp[pair], x) for bp in polys], dtype=np.int64)
        for pair in PAIRS
    }
    for pair in INVERTED_PAIRS:
        zero = np.nonzero(diags[pair] == 0)[0]
        if zero.size:
            raise DegenerateLekError(pair, int(zero[0]), p)
    return ToneChannel(p, diags)


def draw_schedule(net: DelayNetwork, ctx: FieldCtx, root: RootOfUnity, n: int,
                  rng: np.random.Generator, tones, attempts: int = MAX_RESAMPLES):
    """Random schedule whose required inverses exist on every tone in ``tones``.

    Returns ``(schedule, per_block_polys, {p: ToneChannel})``.
    """
    extrema = delay_extrema(net)
    last = None
    for _ in range(attempts):
        sched = LekSchedule(tuple(random_leks(net, ctx, rng) for _ in range(2 * n + 1)), n, root.k)
        polys = block_polys(net, ctx, sched, extrema)
        try:
            channels = {p: tone_channel(net, ctx, sched, p, root, polys) for p in tones}
        except DegenerateLekError as err:
            last = err
            continue
        return sched, polys, channels
    raise DegenerateLekError(last.pair, last.block, last.p) from last


@dataclass(frozen=True)
class PrecodeSet:
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    u: np.ndarray
    r: np.ndarray
    s: np.ndarray
    w: np.ndarray

    def __getitem__(self, i: int) -> np.ndarray:
        return (self.v1, self.v2, self.v3)[i - 1]


def _dmul(ctx, *diags):
    out = diags[0]
    for d in diags[1:]:
        out = ctx.mul_arr(out, d)
    return out


def _dinv(ctx, d):
    return ctx.inv_arr(d)


def _apply(ctx, d, mat):
    """``diag(d) @ mat``."""
    return ctx.mul_arr(np.asarray(d)[:, None], mat)


def build_precoders(ctx: FieldCtx, tc: ToneChannel, n: int) -> PrecodeSet:
    """The Vandermonde-in-``U`` precoders for one tone.

    ``V1 = [W, UW, ..., U^n W]``, ``V2 = R [W, ..., U^(n-1) W]`` and
    ``V3 = S [UW, ..., U^n W]`` with ``U = M12^-1 M32 M31^-1 M21 M23^-1 M13``,
    ``R = M13 M23^-1``, ``S = M12 M32^-1`` and ``W`` all ones.
    """
    size = 2 * n + 1
    if tc.size != size:
        raise ValueError(f"tone channel has {tc.size} blocks, n={n} needs {size}")
    M = tc.diagonals
    inv = {pair: _dinv(ctx, M[pair]) for pair in INVERTED_PAIRS}
    u = _dmul(ctx, inv[1, 2], M[3, 2], inv[3, 1], M[2, 1], inv[2, 3], M[1, 3])
    r = _dmul(ctx, M[1, 3], inv[2, 3])
    s = _dmul(ctx, M[1, 2], inv[3, 2])
    w = np.ones(size, dtype=np.int64)

    cols = [w]
    for _ in range(n):
        cols.append(ctx.mul_arr(u, cols[-1]))
    powers = np.stack(cols, axis=1)  # [W, UW, ..., U^n W]
    v1 = powers
    v2 = _apply(ctx, r, powers[:, :n])
    v3 = _apply(ctx, s, powers[:, 1:])
    return PrecodeSet(v1, v2, v3, u, r, s, w)


def decode_matrix(ctx: FieldCtx, tc: ToneChannel, pc: PrecodeSet, j: int) -> np.ndarray:
    """``[desired | interference basis]`` at destination ``T_j``."""
    M = tc.diagonals
    if j == 1:
        return np.hstack([_apply(ctx, M[1, 1], pc.v1), _apply(ctx, M[2, 1], pc.v2)])
    if j == 2:
        return np.hstack([_apply(ctx, M[2, 2], pc.v2), _apply(ctx, M[1, 2], pc.v1)])
    if j == 3:
        return np.hstack([_apply(ctx, M[3, 3], pc.v3), _apply(ctx, M[1, 3], pc.v1)])
    raise ValueError(f"destination index must be 1..3, got {j}")


def _contained(ctx, a, b) -> bool:
    """``span(a)`` is a subspace of ``span(b)``."""
    return rank(ctx, np.hstack([b, a])) == rank(ctx, b)


@dataclass(frozen=True)
class AlignmentVerdict:
    containments: dict[str, bool]
    ranks: dict[int, int]
    size: int

    @property
    def ok(self) -> bool:
        return all(self.containments.values()) and all(r == self.size for r in self.ranks.values())

    @property
    def failed(self) -> list[str]:
        out = [name for name, good in self.containments.items() if not good]
        out += [f"rank at T{j} = {r} < {self.size}" for j, r in self.ranks.items() if r != self.size]
        return out


def check_alignment(ctx: FieldCtx, tc: ToneChannel, pc: PrecodeSet) -> AlignmentVerdict:
    """Interference span containments and full-rank decoding at all destinations."""
    M = tc.diagonals
    cont = {
        "span(M31 V3) in span(M21 V2)": _contained(ctx, _apply(ctx, M[3, 1], pc.v3), _apply(ctx, M[2, 1], pc.v2)),
        "span(M32 V3) in span(M12 V1)": _contained(ctx, _apply(ctx, M[3, 2], pc.v3), _apply(ctx, M[1, 2], pc.v1)),
        "span(M23 V2) in span(M13 V1)": _contained(ctx, _apply(ctx, M[2, 3], pc.v2), _apply(ctx, M[1, 3], pc.v1)),
    }
    ranks = {j: rank(ctx, decode_matrix(ctx, tc, pc, j)) for j in (1, 2, 3)}
    return AlignmentVerdict(cont, ranks, tc.size)


def channel_output(ctx: FieldCtx, tc: ToneChannel, pc: PrecodeSet, symbols: dict[int, np.ndarray], j: int) -> np.ndarray:
    """``sum_i M_ij^p V_i X'_i``: what ``T_j`` should observe on this tone."""
    acc = np.zeros(tc.size, dtype=np.int64)
    for i in (1, 2, 3):
        acc ^= ctx.mul_arr(tc[i, j], matmul(ctx, pc[i], symbols[i]))
    return acc


@dataclass
class DecodeResult:
    symbols: dict[int, np.ndarray | None] = field(default_factory=dict)
    success: dict[int, bool] = field(default_factory=dict)
    ranks: dict[int, int] = field(default_factory=dict)


def decode(ctx: FieldCtx, tc: ToneChannel, pc: PrecodeSet, received: dict[int, np.ndarray]) -> DecodeResult:
    """Zero-forcing recovery of ``X'_j(p)`` at each destination in ``received``.

    A singular decoding matrix yields ``success=False`` and no symbols; it
    never yields a guess.
    """
    width = {1: pc.v1.shape[1], 2: pc.v2.shape[1], 3: pc.v3.shape[1]}
    out = DecodeResult()
    for j, y in received.items():
        a = decode_matrix(ctx, tc, pc, j)
        try:
            x = solve(ctx, a, y)
        except SingularMatrixError as err:
            out.symbols[j], out.success[j], out.ranks[j] = None, False, err.rank
            continue
        out.symbols[j], out.success[j], out.ranks[j] = x[: width[j]], True, a.shape[0]
    return out
