"""Circulant block channels, their DFT diagonalisation and cyclic prefixes.

Inside a block, vectors use descending time order ``[X^(k-1), ..., X^(0)]``.
With a cyclic prefix of length ``d_max`` in front of every block, the channel
acting on such a vector is the circulant built by :func:`circulant`, and
``F`` from :func:`netalign.galois.dft_matrix` diagonalises it.  Position ``r``
of the diagonal (``l = k - 1 - r``) is ``M(alpha^r)``, which is why
tone ``p`` of a block is simply its ``p``-th entry in descending layout.

:func:`add_cp` and :func:`strip_cp` work on sequences in transmit (ascending
time) order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from netalign.galois import FieldCtx, RootOfUnity, diag
from netalign.netgraph import TransferPoly, eval_transfer


class RateWarning(UserWarning):
    """Cyclic prefix overhead is large relative to the block length."""


@dataclass(frozen=True)
class CirculantSpec:
    k: int
    poly: TransferPoly

    def __post_init__(self):
        if self.k < self.poly.d_max + 1:
            raise ValueError(f"block length k={self.k} must be at least d_max + 1 = {self.poly.d_max + 1}")
        if self.k < 4 * self.poly.d_max:
            warnings.warn(
                f"k={self.k} < 4*d_max={4 * self.poly.d_max}: cyclic prefix costs "
                f"{self.poly.d_max}/{self.k + self.poly.d_max} of the channel uses",
                RateWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class DiagSpectrum:
    """Diagonal of the transformed channel, stored by position ``r = k - 1 - l``."""

    values: tuple[int, ...]

    def entry(self, l: int) -> int:
        return self.values[len(self.values) - 1 - l]

    def matrix(self) -> np.ndarray:
        return diag(self.values)


def circulant(spec: CirculantSpec) -> np.ndarray:
    """``k x k`` matrix with ``C[r, c] = M^((c - r) mod k)`` (zero beyond ``d_max``)."""
    k, coeffs = spec.k, spec.poly.coeffs
    row = np.zeros(k, dtype=np.int64)
    row[: len(coeffs)] = coeffs
    idx = (np.arange(k)[None, :] - np.arange(k)[:, None]) % k
    return row[idx]


def diagonalize(ctx: FieldCtx, spec: CirculantSpec, root: RootOfUnity) -> DiagSpectrum:
    """``M_hat^(l) = sum_d alpha^((k-1-l) d) M^(d)`` for ``l = k-1, ..., 0``."""
    if root.k != spec.k:
        raise ValueError(f"root of unity has order {root.k}, block length is {spec.k}")
    k = spec.k
    out = []
    for r in range(k):  # r = k - 1 - l
        acc = 0
        for d, c in enumerate(spec.poly.coeffs):
            acc ^= ctx.mul(root.power(r * d), c)
        out.append(acc)
    return DiagSpectrum(tuple(out))


def tone_values(ctx: FieldCtx, poly: TransferPoly, root: RootOfUnity) -> list[int]:
    """``M(alpha^p)`` for ``p = 0 .. k-1`` by direct evaluation."""
    return [eval_transfer(ctx, poly, root.power(p)) for p in range(root.k)]


def add_cp(block, d_max: int) -> np.ndarray:
    """Prefix the block (ascending time) with its last ``d_max`` symbols."""
    block = np.asarray(block, dtype=np.int64)
    if d_max >= len(block):
        raise ValueError(f"cyclic prefix d_max={d_max} must be shorter than the block ({len(block)})")
    if d_max == 0:
        return block.copy()
    return np.concatenate([block[-d_max:], block])


def strip_cp(frame, d_max: int, k: int | None = None) -> np.ndarray:
    """Drop the first ``d_max`` received symbols of a frame."""
    frame = np.asarray(frame, dtype=np.int64)
    if k is not None and len(frame) != k + d_max:
        raise ValueError(f"frame has length {len(frame)}, expected k + d_max = {k + d_max}")
    if d_max < 0 or d_max > len(frame):
        raise ValueError(f"cannot strip {d_max} symbols from a frame of {len(frame)}")
    return frame[d_max:].copy()
