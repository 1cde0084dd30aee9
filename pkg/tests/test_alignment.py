import numpy as np
import pytest
from conftest import feasible_corpus

from netalign.alignment import (
    DegenerateLekError,
    LekSchedule,
    build_precoders,
    channel_output,
    check_alignment,
    decode,
    decode_matrix,
    draw_schedule,
    tone_channel,
)
from netalign.galois import make_field, rank, root_of_unity
from netalign.instances import merged_sources, shared_relay
from netalign.netgraph import constant_leks, random_leks


def _setup(net, n=2, k=5, seed=0, tones=(1, 2, 3, 4)):
    ctx = make_field(16)
    root = root_of_unity(ctx, k)
    sched, polys, channels = draw_schedule(net, ctx, root, n, np.random.default_rng(seed), tones)
    return ctx, root, sched, channels


@pytest.mark.parametrize("n", [1, 2, 3])
def test_precoder_column_identities(n):
    seed, net = feasible_corpus(5, 3)[0]
    ctx, _, _, channels = _setup(net, n=n, seed=seed)
    for tc in channels.values():
        pc = build_precoders(ctx, tc, n)
        M, mul = tc.diagonals, ctx.mul_arr
        lhs = mul(M[3, 1][:, None], pc.v3)
        assert np.array_equal(lhs, mul(M[2, 1][:, None], pc.v2))
        # M32 V3 is columns 1..n of M12 V1, M23 V2 is columns 0..n-1 of M13 V1
        assert np.array_equal(mul(M[3, 2][:, None], pc.v3), mul(M[1, 2][:, None], pc.v1)[:, 1:])
        assert np.array_equal(mul(M[2, 3][:, None], pc.v2), mul(M[1, 3][:, None], pc.v1)[:, :n])
        verdict = check_alignment(ctx, tc, pc)
        assert verdict.ok, verdict.failed


def test_decode_recovers_symbols():
    seed, net = feasible_corpus(5, 3)[1]
    ctx, _, _, channels = _setup(net, seed=seed)
    rng = np.random.default_rng(1)
    for tc in channels.values():
        pc = build_precoders(ctx, tc, 2)
        x = {1: ctx.random(rng, size=3), 2: ctx.random(rng, size=2), 3: ctx.random(rng, size=2)}
        y = {j: channel_output(ctx, tc, pc, x, j) for j in (1, 2, 3)}
        out = decode(ctx, tc, pc, y)
        for i in (1, 2, 3):
            assert out.success[i]
            assert np.array_equal(out.symbols[i], x[i])


def test_infeasible_network_is_rank_deficient_without_guesses():
    net = merged_sources()
    ctx, _, _, channels = _setup(net, seed=3)
    rng = np.random.default_rng(0)
    for tc in channels.values():
        pc = build_precoders(ctx, tc, 2)
        x = {1: ctx.random(rng, size=3), 2: ctx.random(rng, size=2), 3: ctx.random(rng, size=2)}
        out = decode(ctx, tc, pc, {j: channel_output(ctx, tc, pc, x, j) for j in (1, 2, 3)})
        for j in (1, 2):
            assert not out.success[j] and out.symbols[j] is None
            assert out.ranks[j] == rank(ctx, decode_matrix(ctx, tc, pc, j)) < 5


def test_constant_eta_collapses_v1():
    ctx, _, _, channels = _setup(shared_relay(), k=3, tones=(1, 2))
    for tc in channels.values():
        pc = build_precoders(ctx, tc, 2)
        assert rank(ctx, pc.v1) == 1
        assert not check_alignment(ctx, tc, pc).ok


def test_degenerate_kernels_are_detected():
    net = shared_relay()
    ctx = make_field(16)
    root = root_of_unity(ctx, 3)
    zero = constant_leks(net, 0)
    sched = LekSchedule((zero,) * 3, 1, 3)
    with pytest.raises(DegenerateLekError):
        tone_channel(net, ctx, sched, 1, root)
    mixed = LekSchedule((zero, random_leks(net, ctx, np.random.default_rng(0)), zero), 1, 3)
    with pytest.raises(DegenerateLekError) as info:
        tone_channel(net, ctx, mixed, 0, root)
    assert info.value.block == 0


def test_schedule_length_checked():
    net = shared_relay()
    with pytest.raises(ValueError):
        LekSchedule((constant_leks(net),) * 2, 1, 3)
    ctx, _, _, channels = _setup(net, n=1, k=3, tones=(1,))
    with pytest.raises(ValueError):
        build_precoders(ctx, channels[1], 2)
