"""Randomised feasibility decision for the three-unicast alignment scheme.

Every quantity here is a ratio of products of transfer values
``M_ij(eps, alpha^p)`` evaluated at independent uniform LEK draws.  Identity
and constancy questions about these rational functions of the LEKs are
settled by polynomial identity testing: all comparisons are cross-multiplied
so that a single violating draw is an exact certificate, while agreement on
every draw is a probabilistic verdict with a stated error bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from netalign.galois import FieldCtx, RootOfUnity, nullspace, rank
from netalign.netgraph import (
    PAIRS,
    DelayNetwork,
    ZeroMinCutError,
    delay_extrema,
    eval_transfer,
    random_leks,
    transfer_polys,
    validate,
)

DEFAULT_TRIALS = 20
MIN_TRIALS = 8
MAX_RESAMPLES = 32

# numerator pairs, denominator pairs
RATIOS = {
    "eta": (((2, 1), (3, 2), (1, 3)), ((3, 1), (2, 3), (1, 2))),
    "b1": (((2, 1), (1, 3)), ((1, 1), (2, 3))),
    "b2": (((2, 2), (1, 3)), ((1, 2), (2, 3))),
    "b3": (((3, 3), (1, 2)), ((1, 3), (3, 2))),
}
DENOMINATOR_PAIRS = tuple(sorted({pair for _, den in RATIOS.values() for pair in den}))
IDENTITIES = ("1", "eta", "eta+1", "eta/(eta+1)")


class ResampleError(ArithmeticError):
    """Every draw was degenerate; some required transfer value vanishes identically."""


def _product(ctx: FieldCtx, values, pairs) -> int:
    acc = 1
    for pair in pairs:
        acc = ctx.mul(acc, values[pair])
    return acc


@dataclass(frozen=True)
class RatioSample:
    """The nine transfer values at one LEK draw and tone, plus the derived ratios."""

    draw: int
    p: int
    values: dict[tuple[int, int], int]
    degenerate: bool
    ctx: FieldCtx = field(repr=False, compare=False)

    def num(self, name: str) -> int:
        return _product(self.ctx, self.values, RATIOS[name][0])

    def den(self, name: str) -> int:
        return _product(self.ctx, self.values, RATIOS[name][1])

    def ratio(self, name: str) -> int | None:
        if self.degenerate:
            return None
        return self.ctx.div(self.num(name), self.den(name))

    @property
    def eta(self):
        return self.ratio("eta")

    @property
    def b(self) -> dict[int, int | None]:
        return {i: self.ratio(f"b{i}") for i in (1, 2, 3)}


def check_supported(net: DelayNetwork) -> None:
    conn = validate(net)
    if conn.zero_min_cut:
        raise ZeroMinCutError(conn.missing)


class _Sampler:
    """Reproducible stream of LEK draws for one ``(seed, p)``."""

    def __init__(self, net, ctx, root, p, seed):
        self.net, self.ctx, self.root, self.p = net, ctx, root, p
        self.rng = np.random.default_rng([seed, p])
        self.extrema = delay_extrema(net)
        self.x = root.power(p)
        self.drawn = 0
        self.discarded = 0

    def raw(self) -> RatioSample:
        leks = random_leks(self.net, self.ctx, self.rng)
        polys = transfer_polys(self.net, self.ctx, leks, self.extrema)
        values = {pair: eval_transfer(self.ctx, polys[pair], self.x) for pair in PAIRS}
        degenerate = any(values[pair] == 0 for pair in DENOMINATOR_PAIRS)
        s = RatioSample(self.drawn, self.p, values, degenerate, self.ctx)
        self.drawn += 1
        return s

    def good(self) -> RatioSample:
        for _ in range(MAX_RESAMPLES):
            s = self.raw()
            if not s.degenerate:
                return s
            self.discarded += 1
        raise ResampleError(
            f"{MAX_RESAMPLES} consecutive degenerate draws at tone {self.p}; "
            "a denominator transfer value appears to vanish identically"
        )

    def batch(self, trials: int) -> list[RatioSample]:
        return [self.good() for _ in range(trials)]


def sample_ratios(net: DelayNetwork, ctx: FieldCtx, root: RootOfUnity, p: int, seed: int = 0) -> RatioSample:
    """First non-degenerate draw of ``eta(p)`` and ``b_i(p)`` for ``seed``."""
    check_supported(net)
    return _Sampler(net, ctx, root, p, seed).good()


def degree_bound(net: DelayNetwork) -> int:
    """Upper bound on the LEK-degree of any single transfer value.

    A path with ``L`` edges contributes a monomial of ``L + 1`` kernels.
    """
    longest: dict[str, int] = {}
    for e in net.topo_edges:
        longest[e.id] = 1 + max((longest[x.id] for x in net.in_edges[e.tail]), default=0)
    return max(longest.values(), default=0) + 1


def _false_agreement(ctx: FieldCtx, degree: int, draws: int) -> float:
    return min(1.0, degree / ctx.order) ** draws


@dataclass(frozen=True)
class ConstancyVerdict:
    """``constant`` is probabilistic; a non-constant verdict names two disagreeing draws."""

    quantity: str
    p: int
    constant: bool
    trials: int
    error_bound: float
    witness: tuple[int, int] | None = None


def _constancy(samples: list[RatioSample], name: str, degree: int, ctx: FieldCtx) -> ConstancyVerdict:
    first = samples[0]
    n0, d0 = first.num(name), first.den(name)
    for s in samples[1:]:
        if ctx.mul(s.num(name), d0) != ctx.mul(n0, s.den(name)):
            return ConstancyVerdict(name, first.p, False, len(samples), 0.0, (first.draw, s.draw))
    factors = len(RATIOS[name][0])
    bound = _false_agreement(ctx, factors * degree, len(samples) - 1)
    return ConstancyVerdict(name, first.p, True, len(samples), bound)


def _guard_trials(trials: int) -> None:
    if trials < MIN_TRIALS:
        raise ValueError(f"at least {MIN_TRIALS} trials are required, got {trials}")


def is_constant(net: DelayNetwork, ctx: FieldCtx, root: RootOfUnity, which: str, p: int,
                trials: int = DEFAULT_TRIALS, seed: int = 0) -> ConstancyVerdict:
    """Is ``which`` (``eta``, ``b1``, ``b2`` or ``b3``) constant in the LEKs at tone ``p``?"""
    if which not in RATIOS:
        raise ValueError(f"unknown quantity {which!r}")
    _guard_trials(trials)
    check_supported(net)
    samples = _Sampler(net, ctx, root, p, seed).batch(trials)
    return _constancy(samples, which, degree_bound(net), ctx)


@dataclass(frozen=True)
class IdentityResult:
    """Outcome of testing ``b_i == candidate`` on a batch of draws."""

    candidate: str
    holds: bool
    trials: int
    error_bound: float
    certificate: dict | None = None


def _identity_sides(ctx: FieldCtx, s: RatioSample, i: int, candidate: str) -> tuple[int, int]:
    nb, db = s.num(f"b{i}"), s.den(f"b{i}")
    ne, de = s.num("eta"), s.den("eta")
    mul = ctx.mul
    if candidate == "1":
        return nb, db
    if candidate == "eta":
        return mul(nb, de), mul(db, ne)
    if candidate == "eta+1":
        return mul(nb, de), mul(db, ne ^ de)
    if candidate == "eta/(eta+1)":
        return mul(nb, ne ^ de), mul(db, ne)
    raise ValueError(f"unknown candidate {candidate!r}")


# LEK-degree of each cross-multiplied identity, in units of one transfer value
_IDENTITY_FACTORS = {"1": 2, "eta": 5, "eta+1": 5, "eta/(eta+1)": 5}


def _membership(samples: list[RatioSample], i: int, degree: int, ctx: FieldCtx) -> dict[str, IdentityResult]:
    out = {}
    for cand in IDENTITIES:
        cert = None
        for s in samples:
            lhs, rhs = _identity_sides(ctx, s, i, cand)
            if lhs != rhs:
                cert = {"draw": s.draw, "p": s.p, "lhs": lhs, "rhs": rhs}
                break
        if cert is None:
            bound = _false_agreement(ctx, _IDENTITY_FACTORS[cand] * degree, len(samples))
            out[cand] = IdentityResult(cand, True, len(samples), bound)
        else:
            out[cand] = IdentityResult(cand, False, len(samples), 0.0, cert)
    return out


def membership_check(net: DelayNetwork, ctx: FieldCtx, root: RootOfUnity, i: int, p: int,
                     trials: int = DEFAULT_TRIALS, seed: int = 0) -> dict[str, IdentityResult]:
    """Test ``b_i(p)`` against each element of ``{1, eta, eta+1, eta/(eta+1)}``."""
    _guard_trials(trials)
    check_supported(net)
    samples = _Sampler(net, ctx, root, p, seed).batch(trials)
    return _membership(samples, i, degree_bound(net), ctx)


@dataclass(frozen=True)
class ToneVerdict:
    p: int
    eta: ConstancyVerdict
    membership: dict[int, dict[str, IdentityResult]] | None
    constancy: dict[int, ConstancyVerdict] | None
    feasible: bool
    discarded: int = 0

    @property
    def blocking(self) -> list[str]:
        """Human-readable reasons for infeasibility, empty when feasible."""
        out = []
        if self.membership is not None:
            for i, res in self.membership.items():
                out += [f"b{i} = {c}" for c, r in res.items() if r.holds]
        if self.constancy is not None:
            out += [f"b{i} constant" for i, c in self.constancy.items() if c.constant]
        return out


def decide_tone(net: DelayNetwork, ctx: FieldCtx, root: RootOfUnity, p: int,
                trials: int = DEFAULT_TRIALS, seed: int = 0) -> ToneVerdict:
    """The case split at one tone, on one shared batch of draws."""
    _guard_trials(trials)
    sampler = _Sampler(net, ctx, root, p, seed)
    samples = sampler.batch(trials)
    degree = degree_bound(net)
    eta = _constancy(samples, "eta", degree, ctx)
    if not eta.constant:
        membership = {i: _membership(samples, i, degree, ctx) for i in (1, 2, 3)}
        feasible = not any(r.holds for res in membership.values() for r in res.values())
        return ToneVerdict(p, eta, membership, None, feasible, sampler.discarded)
    constancy = {i: _constancy(samples, f"b{i}", degree, ctx) for i in (1, 2, 3)}
    feasible = not any(c.constant for c in constancy.values())
    return ToneVerdict(p, eta, None, constancy, feasible, sampler.discarded)


@dataclass
class FeasibilityReport:
    m: int
    k: int
    trials: int
    seed: int
    supported: bool = True
    missing: list[tuple[int, int]] = field(default_factory=list)
    tones: list[ToneVerdict] = field(default_factory=list)
    feasible: bool | None = None
    anomalies: list[str] = field(default_factory=list)

    @property
    def eta_constant(self) -> bool | None:
        return self.tones[0].eta.constant if self.tones else None

    @property
    def error_bound(self) -> float:
        """Union bound over every probabilistic (agreement-based) verdict."""
        total = 0.0
        for t in self.tones:
            if t.eta.constant:
                total += t.eta.error_bound
            for res in (t.membership or {}).values():
                total += sum(r.error_bound for r in res.values() if r.holds)
            for c in (t.constancy or {}).values():
                total += c.error_bound if c.constant else 0.0
        return min(total, 1.0)

    def tone(self, p: int) -> ToneVerdict:
        for t in self.tones:
            if t.p == p:
                return t
        raise KeyError(p)


def feasibility_verdict(net: DelayNetwork, root: RootOfUnity, tones=None,
                        trials: int = DEFAULT_TRIALS, seed: int = 0) -> FeasibilityReport:
    """Decide feasibility at tone 0 and every probed tone, and compare.

    Tones are decided independently (separate draw streams) so agreement
    across tones is an empirical check, not an assumption.  Disagreements are
    recorded in ``anomalies``; the overall verdict then requires every probed
    nonzero tone to be feasible.
    """
    ctx = root.ctx
    report = FeasibilityReport(ctx.m, root.k, trials, seed)
    conn = validate(net)
    if conn.zero_min_cut:
        report.supported = False
        report.missing = conn.missing
        return report
    probe = sorted(set(range(root.k) if tones is None else tones) | {0})
    report.tones = [decide_tone(net, ctx, root, p, trials, seed) for p in probe]

    verdicts = {t.p: t.feasible for t in report.tones}
    etas = {t.p: t.eta.constant for t in report.tones}
    if len(set(etas.values())) > 1:
        report.anomalies.append(f"eta constancy differs across tones: {etas}")
    if len(set(verdicts.values())) > 1:
        report.anomalies.append(f"feasibility differs across tones: {verdicts}")
        nonzero = [v for p, v in verdicts.items() if p != 0] or [verdicts[0]]
        report.feasible = all(nonzero)
    else:
        report.feasible = verdicts[0]
    return report


@dataclass(frozen=True)
class SnVerdict:
    """Whether ``b_i = f(eta)/g(eta)`` with ``deg f <= n``, ``deg g <= n - 1``."""

    i: int
    p: int
    n: int
    member: bool
    eta_constant: bool
    samples: int
    f: tuple[int, ...] | None = None
    g: tuple[int, ...] | None = None


class BudgetError(RuntimeError):
    pass


def sn_oracle(net: DelayNetwork, root: RootOfUnity, i: int, p: int, n: int,
              budget: int = 64, seed: int = 0, extra: int = 6) -> SnVerdict:
    """Brute-force membership of ``b_i(p)`` in the degree-``n`` rational family.

    Each draw gives one linear equation ``f(eta) + b g(eta) = 0`` in the
    ``2n + 1`` unknown coefficients of ``f`` and ``g``; the family contains
    ``b_i`` iff the stacked system has a nonzero solution.  ``2n + 1 + extra``
    draws are used, so a full-rank system is an exact non-membership
    certificate.  If ``eta`` is constant, membership reduces to ``b_i`` being
    constant.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ctx = root.ctx
    need = 2 * n + 1 + extra
    if need > budget:
        raise BudgetError(f"sn_oracle needs {need} draws, budget is {budget}")
    check_supported(net)
    sampler = _Sampler(net, ctx, root, p, seed)
    samples = sampler.batch(need)
    etas = [s.eta for s in samples]
    bs = [s.b[i] for s in samples]

    if len(set(etas)) == 1:
        member = len(set(bs)) == 1
        return SnVerdict(i, p, n, member, True, len(samples),
                         (bs[0],) if member else None, (1,) if member else None)

    rows = []
    for eta, b in zip(etas, bs):
        powers = [ctx.pow(eta, d) for d in range(n + 1)]
        rows.append(powers + [ctx.mul(b, e) for e in powers[:n]])
    a = np.array(rows, dtype=np.int64)
    if rank(ctx, a) == 2 * n + 1:
        return SnVerdict(i, p, n, False, False, len(samples))
    vec = nullspace(ctx, a)[0]
    f = tuple(int(c) for c in vec[: n + 1])
    g = tuple(int(c) for c in vec[n + 1:])
    return SnVerdict(i, p, n, True, False, len(samples), f, g)


def reduced_agrees_with_sn(tone: ToneVerdict, i: int, sn1: SnVerdict, sn2: SnVerdict) -> bool:
    """Do the small-degree brute-force verdicts fit the reduced test for ``b_i``?

    With ``eta`` constant both sides reduce to "``b_i`` is constant".  Otherwise
    membership in the degree-2 family must coincide with one of the four
    reduced identities holding, and a degree-1 fit must match ``1``, ``eta``
    or ``eta + 1`` (``eta / (eta + 1)`` needs a degree-1 denominator).
    """
    if tone.membership is None:
        constant = tone.constancy[i].constant
        return sn1.member == constant and sn2.member == constant
    held = {c for c, r in tone.membership[i].items() if r.holds}
    if sn2.member != bool(held):
        return False
    if sn1.member and not held & {"1", "eta", "eta+1"}:
        return False
    return True
