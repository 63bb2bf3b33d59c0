import pytest

from powertail.distcore import REFERENCE_PARAMS, QuadratureSettings
from powertail.sampler import tabulate


@pytest.fixture(scope="session")
def quad():
    return QuadratureSettings()


@pytest.fixture(scope="session")
def reference_table(quad):
    return tabulate(REFERENCE_PARAMS, quad)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
