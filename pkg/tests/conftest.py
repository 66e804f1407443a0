from __future__ import annotations

import pytest

CRITERIA = {
    1: "incremental distances match full BFS on 1,000 random graphs",
    2: "delta weights telescope to p^d (1e-12)",
    3: "rounding marginals match LP incident mass within 3 sigma",
    4: "lp_approx near brute-force optimum on zero-disparity instances",
    5: "cost of fairness: >=90% disparity cut, parity-free lift higher",
    6: "LP objective bounds every exact-parity integral selection",
    7: "per-node spread_rmpp <= spread_mip <= IC + 3 sigma",
    8: "lp_scale consistent with lp_advanced, faster at >=2,000 nodes",
    9: "full-scale social-network results",
    10: "identical inputs and seed give identical results",
}

_criterion_of: dict[str, int] = {}
_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number checked by this test")


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criterion_of[item.nodeid] = int(mark.args[0])


def pytest_runtest_logreport(report):
    crit = _criterion_of.get(report.nodeid)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.skipped:
            _outcomes.setdefault(crit, []).append("skipped")
        else:
            _outcomes.setdefault(crit, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_of:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(set(_criterion_of.values())):
        outs = _outcomes.get(crit, [])
        if not outs:
            verdict = "NOT RUN"
        elif any(o == "failed" for o in outs):
            verdict = "FAIL"
        elif all(o == "skipped" for o in outs):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        tr.write_line(f"criterion {crit:>2}: {verdict:<7} {CRITERIA.get(crit, '')}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
