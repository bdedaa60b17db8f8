import numpy as np
import pytest

from frs.checks import random_measure, random_spd
from frs.measures import Grid

ACCEPTANCE = {}


def record(criterion, passed, detail=""):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def spd(rng):
    def make(d, lo=0.2, hi=5.0, size=None):
        return random_spd(rng, d, lo, hi, size)

    return make


@pytest.fixture
def measure(rng):
    def make(K, d, lo=0.2, hi=5.0):
        return random_measure(rng, Grid.uniform(K, d), lo, hi)

    return make
