import numpy as np
import pytest

from sgmask.core import make_rng
from sgmask.phantom import phantom_suite


def random_volume(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture(scope="session")
def tiny_suite():
    """Five 8x8x2 phantoms."""
    return phantom_suite(5, N=8, T=2, seed=3)


@pytest.fixture(scope="session")
def small_suite():
    """Four 16x16x4 phantoms: three for training, one for testing."""
    return phantom_suite(4, N=16, T=4, seed=1)


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip tests marked slow")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(results, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
