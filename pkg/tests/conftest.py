import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for randnets

from priosynth.parser import parse_network, parse_query
from priosynth.solver import SolverConfig, find_solver

REPO = Path(__file__).parent.parent
MODELS = REPO / "models"

# verdict lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def load_net(name: str):
    return parse_network((MODELS / f"{name}.net").read_text(), file=name)


def load_query(name: str, net):
    return parse_query((MODELS / f"{name}.q").read_text(), net=net, file=name)


@pytest.fixture(scope="session")
def solver_binary() -> str:
    binary = find_solver()
    if binary is None:
        pytest.fail("no SMT solver available (run `npm install` under tools/)")
    return binary


@pytest.fixture
def solver(solver_binary) -> SolverConfig:
    return SolverConfig(binary=solver_binary)


@pytest.fixture
def n1():
    return load_net("n1")


@pytest.fixture
def n2():
    return load_net("n2")
