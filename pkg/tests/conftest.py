import numpy as np
import pytest
from hypothesis import settings

from hladder import IntercellMode, textured

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def topo():
    """Six-cell benchmark cell in its inverted phase."""
    return textured(3, 4, "P2'm'm", 0.1, t_i=0.15)


@pytest.fixture
def trivial():
    return textured(3, 4, "P2'm'm", 0.1, t_i=0.0015)


@pytest.fixture
def flat_cell():
    return textured(3, 4, "P2'mm'", 0.1, t_i=0.09)


@pytest.fixture(params=list(IntercellMode), ids=lambda m: m.value)
def mode(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def verdict(request):
    """Record one acceptance line: call with (criterion id, passed, detail)."""
    table = request.config.stash[ACCEPTANCE]

    def record(cid, passed, detail):
        table[cid] = (bool(passed), detail)
        print(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(ACCEPTANCE, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(table):
        passed, detail = table[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")
