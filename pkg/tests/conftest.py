import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from forms import parse_form  # noqa: E402
from settings import get_settings  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def z3():
    return parse_form("3", "1/3")


@pytest.fixture
def z3_nonresidue():
    return parse_form("3", "2/3")


@pytest.fixture
def z2():
    return parse_form("2", "1/2")


@pytest.fixture
def trivial():
    return parse_form("1", "0")


@pytest.fixture
def hyperbolic3():
    return parse_form("3,3", "0,1/3;1/3,0")
