import math

import pytest

from sedlab.model import OscillatorParams, ReducedParams


@pytest.fixture
def physical():
    # arbitrary non-unit scales, gamma/omega0 = 1e-2
    m, w0, c = 2.0, 3.0, 1.7
    e = math.sqrt(3 * m * c**3 * 1e-2 / (2 * w0))
    return OscillatorParams(mass=m, omega0=w0, charge=e, hbar=0.5, c=c, k=1.3, validity_bound=0.1)


@pytest.fixture
def reduced_p():
    return ReducedParams(1e-2).to_params()


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.split(".")[-1] == "test_acceptance":
            lines = getattr(mod, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
