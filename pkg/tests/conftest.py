from pathlib import Path

import numpy as np
import pytest

from partialaco import load_instance, load_optima
from partialaco._backend import available, load

DATA = Path(__file__).parent / "data"
BACKENDS = available()


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def optima() -> dict[str, int]:
    return load_optima(DATA / "optima.txt")


@pytest.fixture(scope="session")
def berlin52(optima):
    return load_instance(DATA / "berlin52.tsp", optima)


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return load(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
