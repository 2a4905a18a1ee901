import json
from pathlib import Path

import pytest

from dgm import load_csv

FIXTURES = Path(__file__).parent / "fixtures"

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE = {}


def pytest_addoption(parser):
    parser.addoption(
        "--full-dump",
        default=None,
        metavar="DIR",
        help="directory holding nodes.csv/edges.csv exported from the full dump; "
        "enables the full-scale acceptance profile",
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def toy_paths():
    return FIXTURES / "toy" / "nodes.csv", FIXTURES / "toy" / "edges.csv"


@pytest.fixture
def toy_graph(toy_paths):
    return load_csv(*toy_paths)


@pytest.fixture
def toy_expected():
    return json.loads((FIXTURES / "toy" / "expected.json").read_text())


@pytest.fixture
def sampling_graph():
    d = FIXTURES / "sampling"
    return load_csv(d / "nodes.csv", d / "edges.csv")


@pytest.fixture
def sampling_expected():
    return json.loads((FIXTURES / "sampling" / "expected.json").read_text())
