import json
import warnings
from fractions import Fraction

import numpy as np
import pytest
from conftest import feasible_corpus
from hypothesis import given, settings
from hypothesis import strategies as st

from netalign.alignment import LekSchedule
from netalign.galois import DivisibilityError, make_field, matmul
from netalign.instances import SOURCES, DESTINATIONS, merged_sources, shared_relay
from netalign.netgraph import DelayNetwork, Edge, delay_extrema, random_leks, transfer_polys
from netalign.simulator import (
    FramingError,
    PipelineConfig,
    block_index,
    pbna_pipeline,
    run_time_domain,
    throughput,
)
from netalign.transform import CirculantSpec, RateWarning, add_cp, circulant, strip_cp


def one_hop(delays) -> DelayNetwork:
    """One direct edge per (S_i, T_j) pair, ``delays[i-1][j-1]`` each."""
    edges = tuple(
        Edge(f"e{i}{j}", f"S{i}", f"T{j}", delays[i - 1][j - 1]) for i in (1, 2, 3) for j in (1, 2, 3)
    )
    return DelayNetwork(SOURCES + DESTINATIONS, edges, SOURCES, DESTINATIONS)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), delays=st.lists(st.integers(1, 3), min_size=9, max_size=9))
def test_single_edge_frame_equals_circulant_product(seed, delays):
    net = one_hop([delays[0:3], delays[3:6], delays[6:9]])
    ctx = make_field(16)
    rng = np.random.default_rng(seed)
    delta, dmax = delay_extrema(net)
    k = 5
    leks = random_leks(net, ctx, rng)
    polys = transfer_polys(net, ctx, leks)
    blocks = {i: ctx.random(rng, size=k) for i in (1, 2, 3)}
    length = k + dmax + delta
    inputs = {}
    for i, b in blocks.items():
        x = np.zeros(length, dtype=np.int64)
        x[: k + dmax] = add_cp(b, dmax)
        inputs[i] = x
    sched = LekSchedule((leks,), 0, k)
    trace = run_time_domain(net, ctx, sched, inputs, dmax)
    for j in (1, 2, 3):
        rx = strip_cp(trace.outputs[j][delta: delta + k + dmax], dmax, k)
        want = np.zeros(k, dtype=np.int64)
        for i in (1, 2, 3):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RateWarning)
                c = circulant(CirculantSpec(k, polys[i, j]))
            want ^= matmul(ctx, c, blocks[i][::-1])
        assert np.array_equal(rx[::-1], want)


def test_block_index():
    t = np.arange(-2, 20)
    idx = block_index(t, 5, 2, 3)
    assert idx[:7].tolist() == [0] * 7
    assert idx[7:14].tolist() == [1] * 7
    assert idx[-1] == 2  # clamped


def test_timeline_checks():
    net = shared_relay()
    ctx = make_field(16)
    sched = LekSchedule((random_leks(net, ctx, np.random.default_rng(0)),), 0, 3)
    with pytest.raises(ValueError):
        run_time_domain(net, ctx, sched, {i: np.zeros(3, dtype=np.int64) for i in (1, 2, 3)})
    with pytest.raises(ValueError):
        run_time_domain(net, ctx, sched, {1: np.zeros(9), 2: np.zeros(8), 3: np.zeros(9)})
    with pytest.raises(ValueError):
        run_time_domain(net, ctx, sched, {i: np.zeros(9, dtype=np.int64) for i in (1, 2, 3)}, timing="late")


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(0, 5)
    with pytest.raises(DivisibilityError):
        PipelineConfig(2, 7)
    with pytest.raises(ValueError):
        PipelineConfig(2, 5, tones=(5,))
    assert PipelineConfig(2, 5).decode_tones == (1, 2, 3, 4)
    assert PipelineConfig(2, 5, include_zero=True).decode_tones == (0, 1, 2, 3, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pipeline_recovers_everything(n):
    seed, net = feasible_corpus(5, 3)[n - 1]
    sr = pbna_pipeline(net, PipelineConfig(n, 5, seed=seed, include_zero=True))
    assert sr.model_ok and not sr.miscorrections
    assert all(sr.success.values())
    tp = throughput(sr)
    per_tone = {1: n + 1, 2: n, 3: n}
    for i in (1, 2, 3):
        assert sr.decoded_symbols(i) == 5 * per_tone[i]
        assert tp[i]["payload"] == Fraction(per_tone[i], 2 * n + 1)
        assert tp[i]["wall_clock"] == Fraction(5 * per_tone[i], (2 * n + 1) * (5 + sr.d_max))


def test_encoding_timing_breaks_isolation():
    # wall-clock kernel switches smear in-flight symbols across blocks when delta_min >= 1
    seed, net = feasible_corpus(5, 3)[0]
    assert delay_extrema(net)[0] >= 1
    cfg = PipelineConfig(2, 5, seed=seed)
    sr = pbna_pipeline(net, cfg, timing="encoding", strict=False)
    assert sr.model_mismatches
    with pytest.raises(FramingError):
        pbna_pipeline(net, cfg, timing="encoding")


def test_negative_control_never_guesses():
    sr = pbna_pipeline(merged_sources(), PipelineConfig(2, 5, seed=3))
    assert sr.model_ok and not sr.miscorrections
    for p in (1, 2, 3, 4):
        assert not sr.success[1, p] and not sr.success[2, p]
        assert sr.recovered[1][p] is None and sr.ranks[1, p] < 5


def test_result_serialises():
    seed, net = feasible_corpus(5, 3)[0]
    sr = pbna_pipeline(net, PipelineConfig(1, 5, seed=seed))
    doc = json.loads(json.dumps(sr.to_dict()))
    assert doc["throughput"]["1"]["payload"] == "8/15"  # 4 tones x 2 symbols over 3 blocks of 5
    assert doc["config"]["tones"] == [1, 2, 3, 4]


def test_short_block_rejected():
    seed, net = feasible_corpus(5, 3)[0]
    if delay_extrema(net)[1] < 2:
        pytest.skip("needs d_max >= 2")
    with pytest.raises(ValueError):
        pbna_pipeline(net, PipelineConfig(1, 1))
