import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def grid_fraction(den=8):
    return st.integers(0, den).map(lambda k: Fraction(k, den))


@st.composite
def rational_instances(draw, n_max=4, m_max=4, den=6, gamma_den=4, uniform=False):
    """Small exact instances ``(U rows, gamma list)`` with positive total welfare."""
    n = draw(st.integers(1, n_max))
    m = draw(st.integers(2, m_max))
    U = [[draw(grid_fraction(den)) for _ in range(m)] for _ in range(n)]
    if all(v == 0 for r in U for v in r):
        U[0][0] = Fraction(1)
    if uniform:
        g = draw(grid_fraction(gamma_den))
        gamma = [g] * n
    else:
        gamma = [draw(grid_fraction(gamma_den)) for _ in range(n)]
    return U, gamma


@st.composite
def rankings(draw, n_max=7, m_max=5, n_min=1, m_min=2):
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(m_min, m_max))
    return [list(draw(st.permutations(range(m)))) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
