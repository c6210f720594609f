import os

import pytest
from hypothesis import HealthCheck, settings

from reflekt import suite
from reflekt.qspace import QuadraticSpace
from reflekt.vinberg import run_vinberg

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def prism():
    return suite.prism()


@pytest.fixture(scope="session")
def prism_V(prism):
    return suite.prism_orbit_basis(prism)


@pytest.fixture(scope="session")
def omega():
    return suite.omega()


@pytest.fixture(scope="session")
def triangle_space():
    return QuadraticSpace.diagonal(-1, 2, 1)


@pytest.fixture(scope="session")
def triangle(triangle_space):
    return run_vinberg(triangle_space).polyhedron(triangle_space)


def fn_space(n):
    return QuadraticSpace.diagonal(-2, *([1] * n))


@pytest.fixture(scope="session")
def fn_polyhedra():
    out = {}
    for n in (3, 4, 5):
        s = fn_space(n)
        out[n] = run_vinberg(s).polyhedron(s)
    return out


# one line per acceptance criterion, filled in by test_acceptance and shown after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
