import pytest

from catbox import kernels


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running search or simulation")
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture(params=kernels.available())
def backend(request):
    """Run a test once per importable search kernel."""
    prev = kernels.backend_name()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


CRITERIA = {
    1: "exact line durations, sweep column and certified s8",
    2: "exact ring durations",
    3: "random opening on an exit line",
    4: "exit-line optima, presets and alternative tail",
    5: "twice left, twice right",
    6: "grid without exits",
    7: "grid dwell times, formula and Markov oracle",
    8: "grid with exits, and duration = escape + 1",
    9: "search reproduces the optima",
    10: "prover certificates",
    11: "asymptotic vectors and decay factors",
    12: "sine profile",
    13: "Monte Carlo crosscheck and repeatability",
    14: "property suites",
}
_outcomes: dict = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(crit, []).append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_outcomes):
        runs = _outcomes[crit]
        bad = [name for name, out in runs if out == "failed"]
        skipped = [name for name, out in runs if out == "skipped"]
        status = "FAIL" if bad else "PASS"
        line = f"{status} criterion {crit:>2}: {CRITERIA.get(crit, '')} ({len(runs) - len(bad)}/{len(runs)} checks)"
        if bad:
            line += " failing: " + ", ".join(bad)
        if skipped:
            line += f" [{len(skipped)} skipped]"
        tr.write_line(line)
