from __future__ import annotations

import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

# The interpreter raises this lazily; pinning it up front keeps hypothesis
# from warning about a mid-test change.
sys.setrecursionlimit(60_000)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def repo_dir() -> Path:
    return REPO
