import numpy as np
import pytest

from dropout_rademacher.network import NetworkSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def small_spec(k, activation="tanh", d=3, width=2, budgets=None):
    budgets = budgets or (1.0,) * (k + 1)
    return NetworkSpec(input_dim=d, widths=(width,) * k, budgets=budgets, activation=activation)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, passed, detail)."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
