import math

import pytest
from hypothesis import settings

from fractalc.fractal_set import make_set
from fractalc.staircase import make_staircase

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Γ(1 + ln2/ln3) from the standard library, independent of the package's Lanczos series
GAMMA_CANTOR = math.gamma(1.0 + math.log(2) / math.log(3))


@pytest.fixture(scope="session")
def cantor():
    return make_set(1 / 3)


@pytest.fixture(scope="session")
def cantor_st(cantor):
    return make_staircase(cantor)


@pytest.fixture(scope="session")
def unit_st():
    return make_staircase(make_set(0.5))

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
