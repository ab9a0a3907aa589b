import math

import numpy as np
import pytest

from gkmmnlab.grid import Domain


@pytest.fixture
def dom64():
    return Domain(2 * math.pi, 2 * math.pi, 64, 64)


@pytest.fixture
def dom32():
    return Domain(2 * math.pi, 2 * math.pi, 32, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def golden_dir():
    from pathlib import Path
    return Path(__file__).parent / "golden"


_CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, passed, detail)``."""
    def record(number, passed, detail):
        line = f"CRITERION {number} [{request.node.name}]: {'PASS' if passed else 'FAIL'} {detail}"
        print(line)
        _CRITERIA.setdefault(number, []).append((bool(passed), line))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entries = _CRITERIA[number]
        ok = all(p for p, _ in entries)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}")
        for _, line in entries:
            terminalreporter.write_line("    " + line)
