import os

import pytest

from tubecalc.category import load_spec

FIXDIR = os.environ.get(
    "TUBECALC_FIXTURES",
    os.path.join(os.path.dirname(__file__), "..", "src", "tubecalc", "fixtures"),
)


def fixture_path(name: str) -> str:
    return os.path.join(FIXDIR, name)


@pytest.fixture(scope="session")
def vecz2():
    return load_spec(fixture_path("vecz2.json"), backend="float")


@pytest.fixture(scope="session")
def vecz2_exact():
    return load_spec(fixture_path("vecz2.json"), backend="exact")


@pytest.fixture(scope="session")
def fib():
    return load_spec(fixture_path("fib.json"), backend="float")


@pytest.fixture(scope="session")
def m2():
    return load_spec(fixture_path("m2.json"), backend="float")


@pytest.fixture(scope="session")
def m2_exact():
    return load_spec(fixture_path("m2.json"), backend="exact")
