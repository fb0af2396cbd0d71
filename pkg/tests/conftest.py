import numpy as np
import pytest

from copulaproc.copulas import CopulaModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


FAMILIES = [
    CopulaModel("independence"),
    CopulaModel("gaussian", rho=0.5),
    CopulaModel("gaussian", rho=-0.4),
    CopulaModel("clayton", theta=1.0),
    CopulaModel("clayton", theta=3.0),
    CopulaModel("gumbel", theta=2.0),
    CopulaModel("gumbel", theta=1.3),
]


@pytest.fixture(params=FAMILIES, ids=lambda m: m.spec_string())
def family(request):
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
