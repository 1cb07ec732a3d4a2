import pytest

from fracnls import GridSpec, ModelParams, minimize_J, petviashvili_solve

MAIN = ModelParams(2, 0.8, 0.4, 4.0)
GRID2 = GridSpec(2, 256, 12.0)


@pytest.fixture(scope="session")
def main_params():
    return MAIN


@pytest.fixture(scope="session")
def grid2():
    return GRID2


@pytest.fixture(scope="session")
def main_groundstate():
    return petviashvili_solve(MAIN, GRID2)


@pytest.fixture(scope="session")
def main_minimizer():
    return minimize_J(MAIN, GRID2)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Call ``criterion(number, title, ok, detail)`` to log one acceptance line."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def log(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
        lines.append((number, line))
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
