"""Command-line entry point.

Exit statuses: 0 success/feasible, 1 infeasible or decoding failures,
2 unsupported (zero min-cut), 3 input error, 4 oracle disagreement or an
internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from netalign.feasibility import (
    DEFAULT_TRIALS,
    decide_tone,
    feasibility_verdict,
    reduced_agrees_with_sn,
    sn_oracle,
)
from netalign.galois import DivisibilityError, make_field, root_of_unity
from netalign.instances import PRESETS, GenerationError, generate_network
from netalign.netgraph import (
    PAIRS,
    DelayNetwork,
    NetworkError,
    delay_extrema,
    dump_network,
    load_network,
    random_leks,
    transfer_oracle,
    transfer_polys,
    validate,
)
from netalign.report import Report, feasibility_to_dict
from netalign.schema import SchemaError
from netalign.simulator import FramingError, PipelineConfig, pbna_pipeline, run_time_domain

EXIT_OK, EXIT_INFEASIBLE, EXIT_UNSUPPORTED, EXIT_INPUT, EXIT_MISMATCH = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _tones(text: str | None):
    if text is None or text == "all":
        return None
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tone list {text!r}") from None


def _read_network(path: str) -> DelayNetwork:
    try:
        return load_network(path)
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise InputError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    except SchemaError as err:
        raise InputError(f"{path}: {err}") from None
    except NetworkError as err:
        raise InputError(f"{path}: {err}") from None


def _config(args) -> dict:
    keys = ("network", "field_degree", "block_length", "n", "seed", "trials", "tones", "force")
    cfg = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if "tones" in cfg:
        cfg["tones"] = list(cfg["tones"])
    return cfg


def cmd_check(args) -> Report:
    rep = Report("check", _config(args))
    net = _read_network(args.network)
    root = root_of_unity(make_field(args.field_degree), args.block_length)
    fr = feasibility_verdict(net, root, args.tones, args.trials, args.seed)
    rep.feasibility = feasibility_to_dict(fr)
    if not fr.supported:
        rep.exit_status = EXIT_UNSUPPORTED
    else:
        rep.exit_status = EXIT_OK if fr.feasible else EXIT_INFEASIBLE
    return rep


def cmd_simulate(args) -> Report:
    rep = Report("simulate", _config(args))
    net = _read_network(args.network)
    cfg = PipelineConfig(args.n, args.block_length, args.field_degree, args.seed,
                         args.tones, include_zero=args.include_zero)
    root = root_of_unity(make_field(cfg.m), cfg.k)
    fr = feasibility_verdict(net, root, None, args.trials, args.seed)
    rep.feasibility = feasibility_to_dict(fr)
    if not fr.supported:
        rep.exit_status = EXIT_UNSUPPORTED
        return rep
    if not fr.feasible and not args.force:
        rep.error = "network is infeasible; pass --force to simulate anyway"
        rep.exit_status = EXIT_INFEASIBLE
        return rep
    if fr.eta_constant:
        rep.notes.append("eta is constant: the Vandermonde precoders cannot align, decoding is expected to fail")
    try:
        sr = pbna_pipeline(net, cfg)
    except FramingError as err:
        rep.error = str(err)
        rep.exit_status = EXIT_MISMATCH
        return rep
    rep.simulation = sr.to_dict()
    if sr.miscorrections:
        rep.exit_status = EXIT_MISMATCH
    elif all(sr.success.values()):
        rep.exit_status = EXIT_OK
    else:
        rep.exit_status = EXIT_INFEASIBLE
    return rep


def cmd_gen(args) -> Report:
    rep = Report("gen", {"seed": args.seed, "relays": args.relays, "edges": args.edges,
                         "delays": [args.min_delay, args.max_delay], "preset": args.preset})
    if args.preset:
        net = PRESETS[args.preset]()
    else:
        net = generate_network(args.seed, args.relays, args.edges, (args.min_delay, args.max_delay),
                               "all", args.retries)
    rep.network = net.to_dict()
    return rep


def _compare_transfer(net, ctx, seed, draws, corrupt):
    rng = np.random.default_rng([seed, 7])
    ext = delay_extrema(net)
    conn = validate(net)
    for draw in range(draws):
        leks = random_leks(net, ctx, rng)
        dp = transfer_polys(net, ctx, leks, ext)
        if corrupt:
            tp = dp[1, 1]
            dp[1, 1] = type(tp)(tp.pair, (tp.coeffs[0] ^ 1,) + tp.coeffs[1:], tp.shift)
        for i, j in PAIRS:
            want = transfer_oracle(net, ctx, leks, i, j, ext)
            if not conn.connected(i, j) and not dp[i, j].is_zero():
                return {"draw": draw, "pair": [i, j], "reason": "nonzero transfer without a path"}
            for d, (a, b) in enumerate(zip(dp[i, j].coeffs, want.coeffs)):
                if a != b:
                    return {"draw": draw, "i": i, "j": j, "d": d, "dp": a, "oracle": b}
    return None


def _compare_time_domain(net, ctx, seed, corrupt):
    from netalign.alignment import LekSchedule

    rng = np.random.default_rng([seed, 11])
    delta, dmax = delay_extrema(net)
    leks = random_leks(net, ctx, rng)
    polys = transfer_polys(net, ctx, leks)
    if corrupt:
        tp = polys[1, 1]
        polys[1, 1] = type(tp)(tp.pair, (tp.coeffs[0] ^ 1,) + tp.coeffs[1:], tp.shift)
    sched = LekSchedule((leks,), 0, dmax + 1)
    length = 4 * (delta + dmax + 1) + 16
    inputs = {i: ctx.random(rng, size=length) for i in (1, 2, 3)}
    trace = run_time_domain(net, ctx, sched, inputs, dmax)
    for j in (1, 2, 3):
        want = np.zeros(length, dtype=np.int64)
        for i in (1, 2, 3):
            for d, c in enumerate(polys[i, j].coeffs):
                lag = delta + d
                if c and lag < length:
                    want[lag:] ^= ctx.mul_arr(inputs[i][: length - lag], c)
        bad = np.nonzero(want != trace.outputs[j])[0]
        if bad.size:
            return {"j": j, "t": int(bad[0]) + trace.t_start}
    return None


def _compare_sn(net, root, tones, trials, seed):
    for p in tones:
        tv = decide_tone(net, root.ctx, root, p, trials, seed)
        for i in (1, 2, 3):
            sn = {n: sn_oracle(net, root, i, p, n, seed=seed + 1) for n in (1, 2)}
            if not reduced_agrees_with_sn(tv, i, sn[1], sn[2]):
                return {"p": p, "i": i, "sn1": sn[1].member, "sn2": sn[2].member,
                        "reduced": tv.blocking}
    return None


def cmd_oracle(args) -> Report:
    rep = Report("oracle", _config(args))
    net = _read_network(args.network)
    ctx = make_field(args.field_degree)
    root = root_of_unity(ctx, args.block_length)
    conn = validate(net)
    checks = []
    try:
        first = _compare_transfer(net, ctx, args.seed, 3, args.corrupt_dp)
    except OverflowError as err:
        raise InputError(str(err)) from None
    checks.append({"name": "transfer_poly vs path enumeration", "agree": first is None, "first_mismatch": first})
    first = _compare_time_domain(net, ctx, args.seed, args.corrupt_dp)
    checks.append({"name": "time-domain vs transfer polynomials", "agree": first is None, "first_mismatch": first})
    if conn.zero_min_cut:
        rep.notes.append("zero min-cut: reduced-test vs S_n comparison skipped")
    else:
        tones = args.tones if args.tones is not None else (0, 1)
        first = _compare_sn(net, root, tones, args.trials, args.seed)
        checks.append({"name": "reduced test vs S_n oracle (n=1,2)", "agree": first is None, "first_mismatch": first})
    rep.oracle = {"checks": checks}
    rep.exit_status = EXIT_OK if all(c["agree"] for c in checks) else EXIT_MISMATCH
    return rep


def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("NETALIGN_SEED")
    default_seed = int(env_seed) if env_seed not in (None, "") else 0

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field-degree", "-m", type=int, default=16, dest="field_degree")
    common.add_argument("--block-length", "-k", type=int, default=5, dest="block_length")
    common.add_argument("--seed", type=int, default=default_seed,
                        help="RNG seed (default: $NETALIGN_SEED or 0)")
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--tones", type=_tones, default=None, help="comma-separated tone indices, or 'all'")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="netalign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="decide feasibility of a network file")
    p.add_argument("network")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", parents=[common], help="run the block transmission pipeline")
    p.add_argument("network")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--include-zero", action="store_true", help="also decode tone 0")
    p.add_argument("--force", action="store_true", help="simulate even if the network is infeasible")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", parents=[common], help="emit a random fully connected network")
    p.add_argument("--relays", type=int, default=6)
    p.add_argument("--edges", type=int, default=20)
    p.add_argument("--min-delay", type=int, default=1)
    p.add_argument("--max-delay", type=int, default=3)
    p.add_argument("--retries", type=int, default=100)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", parents=[common], help="cross-check fast paths against brute force")
    p.add_argument("network")
    p.add_argument("--corrupt-dp", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        rep = args.func(args)
    except (InputError, DivisibilityError, GenerationError, ValueError) as err:
        rep = Report(args.command, _config(args), error=str(err), exit_status=EXIT_INPUT)
    rep.timing_s = round(time.perf_counter() - start, 6)

    if args.command == "gen" and rep.network is not None:
        text = dump_network(DelayNetwork.from_dict(rep.network))
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return rep.exit_status
    if rep.error and args.format == "text":
        print(f"netalign {args.command}: {rep.error}", file=sys.stderr)
    sys.stdout.write(rep.to_json() + "\n" if args.format == "json" else rep.to_text())
    return rep.exit_status


if __name__ == "__main__":
    sys.exit(main())
