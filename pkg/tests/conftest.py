import random

import pytest
from hypothesis import HealthCheck, settings

from ptl.core import Structure

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def ab():
    return Structure(("a", "b"), {"P": (1, [("a",)]), "R": (2, [("a", "b")])},
                     {"zero": "a", "one": "b"})


@pytest.fixture
def abc():
    return Structure(("a", "b", "c"), {"P": (1, [("a",)]), "R": (2, [("a", "b"), ("b", "c")])},
                     {"zero": "a", "one": "b"})


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
