import math

import pytest

from ctoa.kernel import PhysicalParams
from ctoa.quadrature import gauss_legendre, rescale


@pytest.fixture(scope="session")
def rule2000():
    return rescale(gauss_legendre(2000), 1.0)


@pytest.fixture(scope="session")
def rule400():
    return rescale(gauss_legendre(400), 1.0)


GAMMAS = {
    "periodic": 0.0,
    "pi/8": math.pi / 8,
    "pi/4": math.pi / 4,
    "antiperiodic": math.pi / 2,
    "-pi/8": -math.pi / 8,
    "small": 0.01,
}


@pytest.fixture(params=list(GAMMAS), ids=list(GAMMAS))
def any_gamma(request):
    return PhysicalParams(gamma=GAMMAS[request.param])


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
