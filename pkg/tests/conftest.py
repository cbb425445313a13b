import math

import pytest

from qdslow import bath, units

ALPHA_PS2 = 0.4 * math.pi**2
W_C = units.mev_to_rate(1.0)
O0 = units.OMEGA0

# filled by tests/test_acceptance.py, printed in the terminal summary
ACCEPTANCE_LINES = {}


def super_ohmic(temperature):
    return bath.BathSpec.super_ohmic(ALPHA_PS2, W_C, temperature)


@pytest.fixture(scope="session")
def bath15():
    return super_ohmic(15.0)


@pytest.fixture(scope="session")
def bath5():
    return super_ohmic(5.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
