import random

import pytest
from hypothesis import HealthCheck, settings

from stripes import catalog
from stripes.atlas import expand

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return random.Random(20261019)


@pytest.fixture(params=sorted(catalog.ATLASES))
def named_expanded(request):
    window = 2 if request.param == "ladder" else 0
    return request.param, expand(catalog.ATLASES[request.param](), window)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
