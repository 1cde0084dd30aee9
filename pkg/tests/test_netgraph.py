import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netalign.galois import make_field
from netalign.instances import PRESETS, GenerationError, diagonal_only, generate_network, shared_relay, single_line
from netalign.netgraph import (
    PAIRS,
    CycleError,
    DelayNetwork,
    Edge,
    LekAssignment,
    NetworkError,
    constant_leks,
    delay_extrema,
    dump_network,
    enumerate_paths,
    eval_transfer,
    load_network,
    pair_delay_bounds,
    random_leks,
    transfer_oracle,
    transfer_poly,
    transfer_polys,
    validate,
)
from netalign.schema import SchemaError

S, T = ("S1", "S2", "S3"), ("T1", "T2", "T3")


def test_shared_relay_hand_derived():
    # unit delays: direct S_i -> T_i (delay 1) plus S_i -> u -> v -> T_j (delay 3)
    net = shared_relay()
    ctx = make_field(8)
    assert delay_extrema(net) == (1, 2)
    polys = transfer_polys(net, ctx, constant_leks(net))
    for i, j in PAIRS:
        want = (1, 0, 1) if i == j else (0, 0, 1)
        assert polys[i, j].coeffs == want
        assert polys[i, j].shift == 1
    assert len(enumerate_paths(net, 2, 2)) == 2


def test_transfer_with_explicit_kernels():
    # one path per pair, S_i -a_i(1)-> u_i -b_i(2)-> T_i, so every M_ii is a single gain
    net = single_line()
    ctx = make_field(8)
    leks = LekAssignment(
        source={(1, "a1"): 3, (2, "a2"): 5, (3, "a3"): 7},
        relay={("a1", "b1"): 2, ("a2", "b2"): 1, ("a3", "b3"): 1},
        sink={("b1", 1): 4, ("b2", 2): 1, ("b3", 3): 0},
    )
    polys = transfer_polys(net, ctx, leks)
    assert delay_extrema(net) == (3, 0)
    assert polys[1, 1].coeffs == (ctx.mul(3, ctx.mul(2, 4)),)
    assert polys[2, 2].coeffs == (5,)
    assert polys[3, 3].is_zero()
    assert polys[1, 2].is_zero()


def test_eval_transfer_is_horner():
    ctx = make_field(16)
    net = shared_relay()
    leks = random_leks(net, ctx, np.random.default_rng(2))
    tp = transfer_poly(net, ctx, leks, 1, 1)
    x = 12345
    naive = 0
    for d, c in enumerate(tp.coeffs):
        naive ^= ctx.mul(c, ctx.pow(x, d))
    assert eval_transfer(ctx, tp, x) == naive


def test_validation_errors():
    with pytest.raises(CycleError):
        DelayNetwork(S + ("a", "b") + T, (Edge("1", "a", "b", 1), Edge("2", "b", "a", 1)), S, T).topo_nodes
    with pytest.raises(CycleError):
        DelayNetwork(S + T, (Edge("1", "S1", "S1", 1),), S, T)
    with pytest.raises(NetworkError):
        DelayNetwork(S + T, (Edge("1", "S1", "T1", 0),), S, T)
    with pytest.raises(NetworkError):
        DelayNetwork(S + T, (Edge("1", "S1", "T1", 1), Edge("1", "S2", "T2", 1)), S, T)
    with pytest.raises(NetworkError):
        DelayNetwork(S + T, (Edge("1", "S1", "Q", 1),), S, T)
    with pytest.raises(NetworkError):
        validate(DelayNetwork(S + T, (Edge("1", "S1", "T1", 1),), S, T))


def test_zero_min_cut_is_reported_not_raised():
    conn = validate(diagonal_only())
    assert conn.zero_min_cut
    assert conn.missing == [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]


def test_pair_delay_bounds():
    net = shared_relay()
    bounds = pair_delay_bounds(net)
    assert bounds[1, 1] == (1, 3)
    assert bounds[1, 2] == (3, 3)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_json_round_trip(tmp_path, name):
    net = PRESETS[name]()
    path = tmp_path / "net.json"
    path.write_text(dump_network(net))
    assert load_network(path) == net


def test_schema_rejects_bad_documents():
    doc = shared_relay().to_dict()
    doc["edges"][0]["delay"] = 0
    with pytest.raises(SchemaError) as info:
        DelayNetwork.from_dict(doc)
    assert info.value.location == "$['edges'][0]['delay']"
    doc = shared_relay().to_dict()
    doc["extra"] = 1
    with pytest.raises(SchemaError):
        DelayNetwork.from_dict(doc)
    doc = shared_relay().to_dict()
    doc["version"] = "1"
    assert DelayNetwork.from_dict(doc) == shared_relay()


def test_lek_round_trip():
    ctx = make_field(16)
    net = generate_network(3)
    leks = random_leks(net, ctx, np.random.default_rng(0))
    assert LekAssignment.from_dict(json.loads(json.dumps(leks.to_dict()))) == leks


def test_enumeration_guard():
    # a ladder of 2-way splits: 2^12 paths
    nodes, edges = ["S1", "S2", "S3"], []
    prev = "S1"
    for n in range(12):
        a, b, c = f"a{n}", f"b{n}", f"c{n}"
        nodes += [a, b, c]
        edges += [Edge(f"{n}x", prev, a, 1), Edge(f"{n}y", prev, b, 1),
                  Edge(f"{n}z", a, c, 1), Edge(f"{n}w", b, c, 1)]
        prev = c
    edges += [Edge("t1", prev, "T1", 1), Edge("t2", "S2", "T2", 1), Edge("t3", "S3", "T3", 1)]
    net = DelayNetwork(tuple(nodes) + T, tuple(edges), S, T)
    assert len(enumerate_paths(net, 1, 1)) == 2**12
    with pytest.raises(OverflowError):
        enumerate_paths(net, 1, 1, limit=1000)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), relays=st.integers(1, 5), edges=st.integers(6, 12))
def test_dp_matches_path_sum(seed, relays, edges):
    try:
        net = generate_network(seed, relays, edges, (1, 3), require="diagonal", retries=5)
    except GenerationError:
        return
    ctx = make_field(16)
    leks = random_leks(net, ctx, np.random.default_rng(seed))
    ext = delay_extrema(net)
    dp = transfer_polys(net, ctx, leks, ext)
    for i, j in PAIRS:
        assert dp[i, j] == transfer_oracle(net, ctx, leks, i, j, ext)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_transfer_is_linear_in_source_kernels(seed):
    # scaling every kernel out of S_i scales row i of the transfer matrix
    net = generate_network(seed % 50)
    ctx = make_field(16)
    rng = np.random.default_rng(seed)
    leks = random_leks(net, ctx, rng)
    c = ctx.random(rng, nonzero=True)
    scaled = LekAssignment(
        {k: ctx.mul(v, c) if k[0] == 2 else v for k, v in leks.source.items()}, leks.relay, leks.sink
    )
    a, b = transfer_polys(net, ctx, leks), transfer_polys(net, ctx, scaled)
    for i, j in PAIRS:
        want = [ctx.mul(x, c) for x in a[i, j].coeffs] if i == 2 else list(a[i, j].coeffs)
        assert list(b[i, j].coeffs) == want
