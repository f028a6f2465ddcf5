import pathlib

import numpy as np
import pytest

from flipchain import available_backends, generate_grid, PopModel

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
BACKENDS = sorted(available_backends())


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def grid50():
    return generate_grid(50, 50, PopModel.normal(100, 50), seed=1)


@pytest.fixture
def grid2():
    return generate_grid(2, 2, PopModel.constant(100))


@pytest.fixture
def grid3():
    return generate_grid(3, 3, PopModel.constant(1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance report

_REPORT: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records and prints one PASS/FAIL line, then asserts."""

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _REPORT.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
