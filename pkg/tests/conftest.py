from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from redopf.cases import bundled_case_text
from redopf.grid import parse_case


@pytest.fixture(scope="session")
def toy2_text():
    return bundled_case_text("case2")


@pytest.fixture(scope="session")
def toy3_text():
    return bundled_case_text("case3")


@pytest.fixture(scope="session")
def toy2(toy2_text):
    return parse_case(toy2_text)


@pytest.fixture(scope="session")
def toy3(toy3_text):
    return parse_case(toy3_text)
