import pytest

from propwave.fv import FvOptions, solve_fv
from propwave.model import reference_params
from propwave.shooting import solve_wave


@pytest.fixture(scope="session")
def ref_params():
    return reference_params()


@pytest.fixture(scope="session")
def ref_wave(ref_params):
    return solve_wave(ref_params)


@pytest.fixture(scope="session")
def ref_fv(ref_params, ref_wave):
    return solve_fv(ref_params, FvOptions(), initial=ref_wave)


# -- acceptance reporting: one line per criterion, printed after the run ----------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
