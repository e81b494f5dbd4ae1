import pytest

from proxdiff import ProximateOrder, normalize


@pytest.fixture(scope="session")
def const1():
    return normalize(ProximateOrder("constant", 1))


@pytest.fixture(scope="session")
def const2():
    return normalize(ProximateOrder("constant", 2))


@pytest.fixture(scope="session")
def loglog():
    return normalize(ProximateOrder("loglog", 2, -1))


@pytest.fixture(scope="session")
def logloglog():
    return normalize(ProximateOrder("logloglog", 2, -1))


_ACCEPTANCE: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion with a PASS/FAIL line")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail, seconds in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{seconds:.1f}s]")
