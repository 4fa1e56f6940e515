import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from adlist import core  # noqa: E402


@pytest.fixture(autouse=True)
def _clear_probe():
    yield
    core.probe = None


@pytest.fixture
def fast_switch():
    """Switch threads far more often than the default 5 ms."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(1e-5)
    yield
    sys.setswitchinterval(old)
