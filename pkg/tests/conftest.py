import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ribbonzeta.ribbon import MetricRibbonGraph, rose_graph, theta_graph  # noqa: E402

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture
def theta11():
    return MetricRibbonGraph(theta_graph(True), (Fraction(1, 3),) * 3)


@pytest.fixture
def theta03():
    return MetricRibbonGraph(theta_graph(False), (Fraction(1, 3),) * 3)


@pytest.fixture
def rose():
    return MetricRibbonGraph(rose_graph(2), (1, 1))
