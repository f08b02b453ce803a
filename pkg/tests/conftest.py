import pytest

from mnclab.analysis import standard_samples
from mnclab.estimators import Estimator
from mnclab.sets import ball_sample, disjoint_indicator_family, spike_family
from mnclab.space import make_uniform_space

NU = Estimator("nu", 1 / 1024, peak=8.0)

# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def space():
    return make_uniform_space(1024)


@pytest.fixture(scope="session")
def samples(space):
    return standard_samples(space, 2.0, 64, 0)


@pytest.fixture(scope="session")
def spikes(space):
    return spike_family(space, 2.0, 10)


@pytest.fixture(scope="session")
def indicators(space):
    return disjoint_indicator_family(space, 2.0, 8)


@pytest.fixture(scope="session")
def ball(space):
    return ball_sample(space, 2.0, 1.0, 64, 0)


@pytest.fixture
def nu_est():
    return NU
