import os
import sys
from collections import OrderedDict

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> list of (test id, outcome, seconds)
_CRITERIA: "OrderedDict[int, list]" = OrderedDict()

CRITERION_TITLES = {
    1: "Airy constants",
    2: "Airy tables (Ai(-n, a1') and I(n, mu))",
    3: "exact contour identities",
    4: "critical constants",
    5: "exact probability tables, n in {100, 1000}, and limit rows",
    6: "strong counts s_r, A_r(1), degree bounds",
    7: "oracle equivalence",
    8: "deformed-exponential root and root asymptotics",
    9: "uniform approximation order",
    10: "residue sum vs contour integral",
    11: "convergence slopes",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")
    config.addinivalue_line("markers", "slow: long-running numerical test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            status = "XFAIL" if rep.skipped else "XPASS"
        elif rep.passed:
            status = "PASS"
        elif rep.skipped:
            status = "SKIP"
        else:
            status = "FAIL"
        _CRITERIA.setdefault(marker.args[0], []).append((item.name, status, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        statuses = [s for _, s, _ in results]
        seconds = sum(d for _, _, d in results)
        if any(s in ("FAIL", "XPASS") for s in statuses):
            verdict = "FAIL"
        elif "XFAIL" in statuses:
            verdict = "FAIL (unattainable as stated; see decisions ledger)"
        elif all(s == "SKIP" for s in statuses):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        counts = ", ".join(f"{statuses.count(s)} {s.lower()}" for s in ("PASS", "FAIL", "XFAIL", "XPASS", "SKIP") if s in statuses)
        title = CRITERION_TITLES.get(number, "")
        terminalreporter.write_line(f"criterion {number:2d} {verdict}: {title} [{counts}; {seconds:.1f}s]")
