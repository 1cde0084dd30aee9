"""Exact arithmetic over GF(2^m), roots of unity and the DFT matrix.

Field elements are plain Python ints in ``[0, 2^m)`` whose bits are the
coefficients of a polynomial in ``x`` reduced modulo the context's reduction
polynomial.  Matrices are 2-D ``numpy`` arrays of dtype ``int64`` holding such
elements; every routine here is exact (addition is XOR, there is no rounding).

Default reduction polynomials are the lexicographically least *primitive*
polynomial of each degree, so that ``x`` (the element ``2``) generates the
multiplicative group and doubles as the fixed primitive element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 20
TABLE_DEGREE = 16

# Least primitive polynomial of each degree, bit i = coefficient of x^i.
DEFAULT_POLYS: dict[int, int] = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100000000101011,
    15: 0b1000000000000011,
    16: 0b10000000000101101,
    17: 0b100000000000001001,
    18: 0b1000000000000100111,
    19: 0b10000000000000100111,
    20: 0b100000000000000001001,
}


class DivisibilityError(ValueError):
    """Block length does not divide the multiplicative group order."""


class SingularMatrixError(ArithmeticError):
    """Raised by solve/inverse; ``rank`` is the rank actually achieved."""

    def __init__(self, rank: int, size: int):
        super().__init__(f"matrix is rank deficient: rank {rank} < {size}")
        self.rank = rank
        self.size = size


def _clmul_reduce(a: int, b: int, poly: int, m: int) -> int:
    r = 0
    top = 1 << m
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """The field GF(2^m) with its reduction polynomial and lookup tables.

    Tables are built for ``m <= 16``; larger fields fall back to carry-less
    multiply-and-reduce.  Instances are immutable and safe to share.
    """

    m: int
    poly: int
    exp: np.ndarray | None = field(repr=False, default=None)
    log: np.ndarray | None = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return 1 << self.m

    @property
    def group_order(self) -> int:
        return (1 << self.m) - 1

    @property
    def generator(self) -> int:
        return 1 if self.m == 1 else 2

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldCtx) and (self.m, self.poly) == (other.m, other.poly)

    def __hash__(self) -> int:
        return hash((self.m, self.poly))

    # ---- scalar arithmetic ----

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.exp is not None:
            return int(self.exp[self.log[a] + self.log[b]])
        return _clmul_reduce(a, b, self.poly, self.m)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 1 if e == 0 else 0
        if self.exp is not None:
            return int(self.exp[(int(self.log[a]) * e) % self.group_order])
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        if self.exp is not None:
            return int(self.exp[(self.group_order - int(self.log[a])) % self.group_order])
        return self.pow(a, self.group_order - 1)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # ---- vectorised arithmetic on int64 arrays ----

    def mul_arr(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.exp is not None:
            a, b = np.broadcast_arrays(a, b)
            zero = (a == 0) | (b == 0)
            out = self.exp[self.log[a] + self.log[b]]
            return np.where(zero, 0, out).astype(np.int64)
        a, b = np.broadcast_arrays(a, b)
        a = a.copy()
        b = b.copy()
        r = np.zeros(a.shape, dtype=np.int64)
        top = np.int64(1 << self.m)
        for _ in range(self.m):
            r ^= np.where(b & 1, a, 0)
            b >>= 1
            a <<= 1
            a = np.where(a & top, a ^ self.poly, a)
        return r

    def inv_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        if self.exp is not None:
            return self.exp[(self.group_order - self.log[a]) % self.group_order].astype(np.int64)
        return np.vectorize(self.inv, otypes=[np.int64])(a)

    def random(self, rng: np.random.Generator, size=None, nonzero: bool = False):
        lo = 1 if nonzero else 0
        out = rng.integers(lo, self.order, size=size, dtype=np.int64)
        return int(out) if size is None else out


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2 over GF(2)."""
    m = poly.bit_length() - 1
    if m < 1:
        return False
    for d in range(2, 1 << (m // 2 + 1)):
        if (d.bit_length() - 1) > m // 2:
            break
        a = poly
        dd = d.bit_length() - 1
        while a and a.bit_length() - 1 >= dd:
            a ^= d << (a.bit_length() - 1 - dd)
        if a == 0:
            return False
    return True


_FIELDS: dict[tuple[int, int], FieldCtx] = {}


def make_field(m: int, poly: int | None = None) -> FieldCtx:
    """Return the context for GF(2^m), ``1 <= m <= 20``.

    With ``poly=None`` the documented default from :data:`DEFAULT_POLYS` is
    used.  Contexts are cached, so repeated calls are cheap.
    """
    if not isinstance(m, int) or not 1 <= m <= MAX_DEGREE:
        raise ValueError(f"extension degree m must be in 1..{MAX_DEGREE}, got {m!r}")
    if poly is None:
        poly = DEFAULT_POLYS[m]
    if poly.bit_length() - 1 != m:
        raise ValueError(f"reduction polynomial {poly:#b} does not have degree {m}")
    key = (m, poly)
    if key in _FIELDS:
        return _FIELDS[key]

    exp = log = None
    if m <= TABLE_DEGREE:
        n = (1 << m) - 1
        exp = np.zeros(2 * n + 1, dtype=np.int64)
        log = np.zeros(1 << m, dtype=np.int64)
        g = 1 if m == 1 else 2
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = _clmul_reduce(x, g, poly, m)
        if x != 1 or (n > 1 and len(set(exp[:n].tolist())) != n):
            raise ValueError(f"{poly:#b}: x is not primitive; exp/log tables need a primitive polynomial")
        exp[n:2 * n] = exp[:n]
        exp[2 * n] = exp[0]
    ctx = FieldCtx(m, poly, exp, log)
    _FIELDS[key] = ctx
    return ctx


@dataclass(frozen=True)
class RootOfUnity:
    """A primitive ``k``-th root of unity ``alpha`` in ``ctx``."""

    ctx: FieldCtx
    alpha: int
    k: int

    def power(self, e: int) -> int:
        return self.ctx.pow(self.alpha, e % self.k)


def root_of_unity(ctx: FieldCtx, k: int) -> RootOfUnity:
    """``alpha = g^((2^m - 1)/k)`` for the fixed primitive element ``g``."""
    if k < 1 or ctx.group_order % k:
        raise DivisibilityError(
            f"block length k={k} does not divide 2^{ctx.m} - 1 = {ctx.group_order}"
        )
    alpha = ctx.pow(ctx.generator, ctx.group_order // k)
    return RootOfUnity(ctx, alpha, k)


def dft_matrix(root: RootOfUnity) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F, F_inv)`` with ``F[i, j] = alpha^(ij)``.

    ``k`` is odd, so ``k * 1 = 1`` in characteristic 2 and the inverse needs
    no scalar normalisation: ``F_inv[i, j] = alpha^(-ij)``.
    """
    k = root.k
    powers = [root.power(e) for e in range(k)]
    idx = np.outer(np.arange(k), np.arange(k)) % k
    table = np.array(powers, dtype=np.int64)
    return table[idx], table[(-idx) % k]


# ---- dense matrices ----

def identity(k: int) -> np.ndarray:
    return np.eye(k, dtype=np.int64)


def diag(values) -> np.ndarray:
    return np.diag(np.asarray(values, dtype=np.int64))


def matadd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.shape(a) != np.shape(b):
        raise ValueError(f"cannot add {np.shape(a)} and {np.shape(b)}")
    return np.bitwise_xor(a, b)


def matmul(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    if a.shape[1] == 0:
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    else:
        out = np.bitwise_xor.reduce(ctx.mul_arr(a[:, :, None], b[None, :, :]), axis=1)
    return out[:, 0] if vec else out


def row_reduce(ctx: FieldCtx, a: np.ndarray, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination.

    Pivots are searched only in the first ``ncols`` columns, which lets
    callers reduce an augmented matrix.  Returns ``(R, pivot_columns)``.
    """
    r = np.array(a, dtype=np.int64, copy=True)
    rows, cols = r.shape
    if ncols is None:
        ncols = cols
    pivots: list[int] = []
    prow = 0
    for c in range(ncols):
        if prow == rows:
            break
        nz = np.nonzero(r[prow:, c])[0]
        if nz.size == 0:
            continue
        hit = prow + int(nz[0])
        if hit != prow:
            r[[prow, hit]] = r[[hit, prow]]
        r[prow] = ctx.mul_arr(r[prow], ctx.inv(int(r[prow, c])))
        others = np.nonzero(r[:, c])[0]
        others = others[others != prow]
        if others.size:
            r[others] ^= ctx.mul_arr(r[others, c][:, None], r[prow][None, :])
        pivots.append(c)
        prow += 1
    return r, pivots


def rank(ctx: FieldCtx, a: np.ndarray) -> int:
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return 0
    return len(row_reduce(ctx, a)[1])


def solve(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unique solution of ``a @ x = b`` for square full-rank ``a``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"solve needs a square matrix, got {a.shape}")
    vec = b.ndim == 1
    rhs = b[:, None] if vec else b
    red, pivots = row_reduce(ctx, np.hstack([a, rhs]), ncols=n)
    if len(pivots) < n:
        raise SingularMatrixError(len(pivots), n)
    x = red[:, n:]
    return x[:, 0] if vec else x


def inverse(ctx: FieldCtx, a: np.ndarray) -> np.ndarray:
    return solve(ctx, a, identity(np.shape(a)[0]))


def nullspace(ctx: FieldCtx, a: np.ndarray) -> np.ndarray:
    """Basis of the right null space, one vector per row."""
    a = np.asarray(a, dtype=np.int64)
    cols = a.shape[1]
    red, pivots = row_reduce(ctx, a)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for n, f in enumerate(free):
        basis[n, f] = 1
        for prow, pc in enumerate(pivots):
            basis[n, pc] = red[prow, f]  # char 2: -x == x
    return basis
