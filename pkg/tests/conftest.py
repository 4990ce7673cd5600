import math

import numpy as np
import pytest

from uavnoma.config import ScenarioConfig, with_overrides


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def scenario(delta_deg=5.0, **changes):
    """Paper baseline with a few fields replaced (dotted names allowed)."""
    base = with_overrides(ScenarioConfig(), **{"region.horizontal_angle_rad": math.radians(delta_deg)})
    return with_overrides(base, **changes) if changes else base


@pytest.fixture
def make_scenario():
    return scenario


_REPORT: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
