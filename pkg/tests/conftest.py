"""Shared pytest fixtures for the MBM Forensics test suite."""

import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def debug_text() -> str:
    return (FIXTURES / "two_frame_320x240.mbdebug.txt").read_text()


@pytest.fixture
def mv_text() -> str:
    return (FIXTURES / "two_frame_320x240.mvs.csv").read_text()


@pytest.fixture
def golden_grid_text() -> str:
    return (FIXTURES / "two_frame_320x240.grid.txt").read_text()
