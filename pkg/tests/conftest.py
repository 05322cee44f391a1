import os

import numpy as np
import pytest

from chromasr.imgcore import ColorImage, read_image

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(seed, h, w, lo=0.0, hi=255.0):
    r = np.random.default_rng(seed)
    return ColorImage(r.uniform(lo, hi, size=(3, h, w)))


@pytest.fixture(scope="session")
def astronaut():
    return read_image(os.path.join(DATA, "astronaut_256.png"))


@pytest.fixture(scope="session")
def astronaut_path():
    return os.path.join(DATA, "astronaut_256.png")


_ACCEPTANCE = pytest.StashKey()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number, title, passed, detail):
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        print(line)
        lines.append((number, line))
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
