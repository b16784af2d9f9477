"""Shared fixtures and the acceptance summary printed at the end of a run."""
import numpy as np
import pytest

_OUTCOMES: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _OUTCOMES[number] = (title, "PASS" if rep.passed else "FAIL", detail, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, status, detail, dur = _OUTCOMES[number]
        line = f"[{status}] criterion {number:2d}: {title} ({dur:.1f} s)"
        if detail:
            line += f" | {detail}"
        tr.write_line(line, green=status == "PASS", red=status == "FAIL")
