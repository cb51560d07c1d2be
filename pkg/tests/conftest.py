import numpy as np
import pytest

from marinesim import config
from marinesim import control as ctl
from marinesim import references as refs
from marinesim import vessel as vsl

ETA0 = np.array([1.0, -1.0, 0.3])


@pytest.fixture(scope="session")
def uuv():
    return vsl.uuv_open_frame()


@pytest.fixture(scope="session")
def gains():
    return ctl.uuv_gains()


@pytest.fixture(scope="session")
def sweep():
    return refs.LawnmowerReference(speed=0.25, amplitude=2.0, period=40.0)


@pytest.fixture(scope="session")
def rov():
    return config.load_scenario("rov6_hydrostatic")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_eta(rng, n):
    if n == 3:
        return np.array([*rng.uniform(-5, 5, 2), rng.uniform(-np.pi, np.pi)])
    return np.array([*rng.uniform(-5, 5, 3), rng.uniform(-np.pi, np.pi),
                     rng.uniform(-1.4, 1.4), rng.uniform(-np.pi, np.pi)])


def random_state(rng, params, speed=1.0):
    n = params.n
    nu = rng.normal(scale=speed, size=n)
    return np.concatenate([random_eta(rng, n), params.M @ nu])


# acceptance lines, printed after the run
ACCEPTANCE = {}


def report(k, title, passed, detail):
    line = f"criterion {k:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[k] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
