import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from olab.grid import DyadicGrid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def grid10():
    return DyadicGrid(1, 10)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
