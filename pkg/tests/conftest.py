import pytest

from relsteinberg.pairs import FF
from relsteinberg.rings import FiniteRing


@pytest.fixture(scope="session")
def zmod():
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = FiniteRing.zmod(n)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def ff(zmod):
    return lambda n: FF(zmod(n))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
