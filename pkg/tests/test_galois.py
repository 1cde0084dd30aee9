import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netalign.galois import (
    DEFAULT_POLYS,
    DivisibilityError,
    SingularMatrixError,
    dft_matrix,
    identity,
    inverse,
    is_irreducible,
    make_field,
    matmul,
    nullspace,
    rank,
    root_of_unity,
    solve,
)


def slow_mul(a: int, b: int, poly: int, m: int) -> int:
    """Schoolbook carry-less product followed by long division."""
    prod = 0
    for bit in range(b.bit_length()):
        if b >> bit & 1:
            prod ^= a << bit
    for bit in range(prod.bit_length() - 1, m - 1, -1):
        if prod >> bit & 1:
            prod ^= poly << (bit - m)
    return prod


def span_size(ctx, rows) -> int:
    """Number of distinct vectors in the row space, by enumeration."""
    seen = set()
    for coeffs in itertools.product(range(ctx.order), repeat=len(rows)):
        acc = np.zeros(len(rows[0]), dtype=np.int64)
        for c, r in zip(coeffs, rows):
            acc ^= ctx.mul_arr(c, r)
        seen.add(tuple(acc.tolist()))
    return len(seen)


@pytest.mark.parametrize("m", sorted(DEFAULT_POLYS))
def test_default_polys_are_irreducible_and_primitive(m):
    assert is_irreducible(DEFAULT_POLYS[m])
    if m <= 16:
        make_field(m)  # table construction rejects non-primitive x


def test_known_values_gf256():
    ctx = make_field(8)
    assert ctx.poly == 0x11D
    assert ctx.pow(2, 8) == 0x1D
    assert ctx.inv(2) == 0x8E
    assert ctx.mul(0x80, 0x02) == 0x1D


def test_bad_arguments():
    with pytest.raises(ValueError):
        make_field(0)
    with pytest.raises(ValueError):
        make_field(21)
    with pytest.raises(ValueError):
        make_field(8, 0b1011)
    with pytest.raises(ValueError):
        make_field(8, 0x11B)  # irreducible, but x has order 51
    with pytest.raises(ZeroDivisionError):
        make_field(8).inv(0)


@settings(max_examples=300, deadline=None)
@given(m=st.sampled_from([2, 5, 8, 13, 16, 17, 20]), data=st.data())
def test_mul_matches_schoolbook(m, data):
    ctx = make_field(m)
    a = data.draw(st.integers(0, ctx.order - 1))
    b = data.draw(st.integers(0, ctx.order - 1))
    assert ctx.mul(a, b) == slow_mul(a, b, ctx.poly, m)
    assert int(ctx.mul_arr(a, b)) == ctx.mul(a, b)


@settings(max_examples=200, deadline=None)
@given(m=st.sampled_from([3, 8, 16, 18]), data=st.data())
def test_field_axioms(m, data):
    ctx = make_field(m)
    a, b, c = (data.draw(st.integers(0, ctx.order - 1)) for _ in range(3))
    assert ctx.mul(a, b ^ c) == ctx.mul(a, b) ^ ctx.mul(a, c)
    assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))
    if a:
        assert ctx.mul(a, ctx.inv(a)) == 1
        assert ctx.pow(a, ctx.group_order) == 1
        assert ctx.pow(a, -3) == ctx.inv(ctx.pow(a, 3))


def test_wide_field_arrays_match_scalar():
    ctx = make_field(19)
    rng = np.random.default_rng(4)
    a = ctx.random(rng, size=50)
    b = ctx.random(rng, size=50, nonzero=True)
    prod = ctx.mul_arr(a, b)
    assert prod.tolist() == [ctx.mul(int(x), int(y)) for x, y in zip(a, b)]
    assert ctx.mul_arr(b, ctx.inv_arr(b)).tolist() == [1] * 50


@pytest.mark.parametrize("m,k", [(16, 3), (16, 5), (16, 15), (16, 17), (12, 7), (12, 9), (12, 13), (4, 15)])
def test_root_of_unity_has_exact_order(m, k):
    root = root_of_unity(make_field(m), k)
    orders = [e for e in range(1, k + 1) if root.power(e) == 1]
    assert orders[0] == k


@pytest.mark.parametrize("k", [2, 7, 9, 11])
def test_root_of_unity_rejects_non_divisors(k):
    with pytest.raises(DivisibilityError):
        root_of_unity(make_field(16), k)


def test_frozen_root_gf65536():
    # alpha = 2^(65535/5) under x^16 + x^5 + x^3 + x^2 + 1, from slow_mul
    ctx = make_field(16)
    x = 1
    for _ in range(65535 // 5):
        x = slow_mul(x, 2, ctx.poly, 16)
    assert root_of_unity(ctx, 5).alpha == x == 0x86FA


@pytest.mark.parametrize("m,k", [(16, 5), (16, 15), (12, 7), (12, 13)])
def test_dft_inverse(m, k):
    ctx = make_field(m)
    F, F_inv = dft_matrix(root_of_unity(ctx, k))
    assert np.array_equal(matmul(ctx, F, F_inv), identity(k))
    assert np.array_equal(matmul(ctx, F_inv, F), identity(k))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), rows=st.integers(1, 3), cols=st.integers(1, 3))
def test_rank_matches_span_enumeration(seed, rows, cols):
    ctx = make_field(2)
    rng = np.random.default_rng(seed)
    a = ctx.random(rng, size=(rows, cols))
    r = rank(ctx, a)
    assert span_size(ctx, list(a)) == ctx.order ** r
    ns = nullspace(ctx, a)
    assert len(ns) == cols - r
    for v in ns:
        assert not matmul(ctx, a, v).any()


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), size=st.integers(1, 7))
def test_solve_and_inverse(seed, size):
    ctx = make_field(16)
    rng = np.random.default_rng(seed)
    a = ctx.random(rng, size=(size, size))
    x = ctx.random(rng, size=size)
    b = matmul(ctx, a, x)
    if rank(ctx, a) < size:
        with pytest.raises(SingularMatrixError):
            solve(ctx, a, b)
        return
    assert np.array_equal(solve(ctx, a, b), x)
    assert np.array_equal(matmul(ctx, a, inverse(ctx, a)), identity(size))


def test_singular_error_reports_rank():
    ctx = make_field(8)
    a = np.array([[1, 2], [2, 4]], dtype=np.int64)  # second row = 2 * first
    with pytest.raises(SingularMatrixError) as info:
        solve(ctx, a, np.array([1, 0]))
    assert info.value.rank == 1


def test_table_sizes():
    ctx = make_field(10)
    assert len(ctx.exp) == 2 * ctx.group_order + 1
