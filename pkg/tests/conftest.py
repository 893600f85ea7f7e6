"""Shared fixtures: isolated settings and log file per test."""

import numpy as np
import pytest

from src.config import reset_settings
from src.dynamics.sft import TransitionStructure
from src.utils.logging_config import reset_logging


@pytest.fixture(autouse=True)
def _isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setenv("ERGOPT_LOG_FILE", str(tmp_path / "ergopt.log"))
    monkeypatch.setenv("ERGOPT_THREADS", "2")
    reset_settings()
    reset_logging()
    yield
    reset_logging()
    reset_settings()


@pytest.fixture
def golden():
    return TransitionStructure.golden_mean()


@pytest.fixture
def full2():
    return TransitionStructure.full_shift(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
