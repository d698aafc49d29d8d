import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from grandamalgam.expressions import MeasureSpace
from grandamalgam.grandnorm import GrandExponent
from grandamalgam.amalgam import Window

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def omega():
    return MeasureSpace(0.0, 1.0)


@pytest.fixture(scope="session")
def G21():
    return GrandExponent(2.0, 1.0)


@pytest.fixture(scope="session")
def G31():
    return GrandExponent(3.0, 1.0)


@pytest.fixture(scope="session")
def quarter_window():
    return Window(0.0, 0.25)


def dense_sup(fn, grid):
    """Independent sup oracle: maximum over a dense grid."""
    return float(np.max([fn(x) for x in grid]))
