import json
from importlib import resources

import pytest

from bbgkz.fans import fan_from_json, validate_fan


def bundled(name: str) -> dict:
    return json.loads((resources.files("bbgkz") / "data" / f"{name}.json").read_text())


def samples_of(doc: dict) -> list[tuple[complex, ...]]:
    return [tuple(complex(a, b) for a, b in s) for s in doc["samples"]]


@pytest.fixture(scope="session")
def fine_doc():
    return bundled("keyexample")


@pytest.fixture(scope="session")
def coarse_doc():
    return bundled("keyexample-coarse")


@pytest.fixture(scope="session")
def fine(fine_doc):
    return fan_from_json(fine_doc)


@pytest.fixture(scope="session")
def coarse(coarse_doc):
    return fan_from_json(coarse_doc)


# local projective plane: smooth, rank 3, one compact divisor
P2_POINTS = [[-1, -1, 1], [1, 0, 1], [0, 1, 1], [0, 0, 1]]


@pytest.fixture(scope="session")
def local_p2():
    return validate_fan(3, P2_POINTS, [[1, 2, 4], [2, 3, 4], [1, 3, 4]])


@pytest.fixture(scope="session")
def c3_mod_3():
    return validate_fan(3, P2_POINTS, [[1, 2, 3]])


@pytest.fixture(scope="session")
def a1():
    """Resolved A1 surface singularity."""
    return validate_fan(2, [[0, 1], [1, 1], [2, 1]], [[1, 2], [2, 3]])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
