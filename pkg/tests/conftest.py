"""
Shared Test Fixtures
Default link budget, reusable mode decompositions and a CLI runner
"""

import logging
import os
import sys

import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.models import LinkBudget, ModeDecomposition  # noqa: E402


@pytest.fixture
def budget():
    return LinkBudget()


@pytest.fixture
def single_mode():
    return ModeDecomposition.single_mode()


@pytest.fixture
def two_modes():
    return ModeDecomposition((0.5, 0.5), 0.5)


@pytest.fixture
def three_modes():
    return ModeDecomposition.from_weights([0.6, 0.3, 0.1])


@pytest.fixture
def runner(monkeypatch):
    """CliRunner with REPEATER_* variables cleared and the root logger restored afterwards"""
    for key in list(os.environ):
        if key.startswith('REPEATER_'):
            monkeypatch.delenv(key)
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield CliRunner()
    root.handlers[:] = handlers
    root.setLevel(level)
