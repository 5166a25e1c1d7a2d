import pathlib
import sys

import pytest

TESTS_DIR = pathlib.Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent
SYSTEMS_DIR = REPO_ROOT / "systems"

# make tests/gensys.py importable from every test module
sys.path.insert(0, str(TESTS_DIR))

from snpkit.model import parse_system  # noqa: E402


@pytest.fixture(scope="session")
def example1_text() -> str:
    return (SYSTEMS_DIR / "example1.snp").read_text()


@pytest.fixture(scope="session")
def example3_text() -> str:
    return (SYSTEMS_DIR / "example3.snp").read_text()


@pytest.fixture(scope="session")
def example1(example1_text):
    return parse_system(example1_text)


@pytest.fixture(scope="session")
def example3(example3_text):
    return parse_system(example3_text)
