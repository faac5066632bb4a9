from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from transfernet.records import StayRecord, day_index  # noqa: E402


def stay(fac, adm, dis, pid="P1", icd="I21.0", base="2015-01-01", gender="male", region="03"):
    """Stay with admission/discharge given as day offsets from ``base``."""
    b = day_index(base)
    return StayRecord(pid, gender, fac, region, b + adm, b + dis, icd, None)


@pytest.fixture
def mk():
    return stay


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    state = {"detail": ""}

    def note(text: str):
        state["detail"] = text

    yield note
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "SKIP" if rep is not None and rep.skipped else "FAIL"
    name = request.node.function.__doc__.strip().splitlines()[0]
    line = f"{status}  {name}"
    if state["detail"]:
        line += f"  [{state['detail']}]"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
