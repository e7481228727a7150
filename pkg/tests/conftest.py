import pytest

from cmcensus.cmcurve import get_curve, registry

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def curves():
    return registry()


@pytest.fixture(scope="session")
def E11():
    return get_curve("cm-11")


@pytest.fixture(scope="session")
def E4():
    return get_curve("cm-4")


@pytest.fixture(scope="session")
def E3():
    return get_curve("cm-3")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
