"""Shared fixtures, corpus builders and the acceptance summary hook."""

from __future__ import annotations

import functools

import pytest

from netalign.feasibility import feasibility_verdict
from netalign.galois import make_field, root_of_unity
from netalign.instances import GenerationError, generate_network
from netalign.netgraph import delay_extrema

# (criterion number, passed, detail), filled by test_acceptance.py
ACCEPTANCE: list[tuple[int, bool, str]] = []


@functools.lru_cache(maxsize=None)
def feasible_corpus(k: int, count: int, m: int = 16) -> tuple:
    """``(seed, network)`` pairs that are feasible with ``eta`` non-constant and fit ``k``."""
    root = root_of_unity(make_field(m), k)
    shape = {"relays": 4, "edges": 13, "delays": (1, 1)} if k == 3 else {"relays": 4, "edges": 14, "delays": (1, 2)}
    out = []
    for seed in range(2000):
        try:
            net = generate_network(seed, retries=20, **shape)
        except GenerationError:
            continue
        if delay_extrema(net)[1] + 1 > k:
            continue
        fr = feasibility_verdict(net, root, trials=20, seed=seed)
        if fr.feasible and not fr.eta_constant:
            out.append((seed, net))
            if len(out) == count:
                return tuple(out)
    raise RuntimeError(f"only {len(out)} feasible networks for k={k}")


@pytest.fixture(scope="session")
def gf16():
    return make_field(16)


@pytest.fixture(scope="session")
def gf8():
    return make_field(8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
