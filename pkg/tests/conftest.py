"""Shared fixtures: the two calibrated scenario runs are expensive enough
to cache for the whole session."""

from __future__ import annotations

import pytest

from tissuebench.harness import run_scenario
from tissuebench.presets import load_experiment_config


@pytest.fixture(scope="session")
def soft_run():
    cfg = load_experiment_config("ecoflex10")
    samples, summary = run_scenario(cfg)
    return cfg, samples, summary


@pytest.fixture(scope="session")
def hard_run():
    cfg = load_experiment_config("ecoflex30")
    samples, summary = run_scenario(cfg)
    return cfg, samples, summary
