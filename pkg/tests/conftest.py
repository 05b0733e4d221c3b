import numpy as np
import pytest

from rbtll import RbtllParams

# one "[AC-n] PASS|FAIL ..." line per acceptance criterion, echoed at session end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[0].split("-")[1])):
        terminalreporter.write_line(line)


def random_thetas(n, seed, upsilon=(0.3, 5.0), gamma=(-3.0, 3.0), p=(0.01, 0.99)):
    rng = np.random.default_rng(seed)
    return [RbtllParams(rng.uniform(*gamma), rng.uniform(*upsilon), rng.uniform(*p)) for _ in range(n)]


@pytest.fixture(scope="session")
def pump():
    from rbtll import builtin
    return builtin("pump")


@pytest.fixture(scope="session")
def rock():
    from rbtll import builtin
    return builtin("rock")
