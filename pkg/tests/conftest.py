"""Shared fixtures: expensive reference runs are computed once per session."""

import numpy as np
import pytest

from deitsim.config import load_config
from deitsim import runs

TWO_PI = 2.0 * np.pi
MHZ = TWO_PI * 1e6


@pytest.fixture(scope="session")
def fig2_cfg():
    return load_config(preset="fig2")


@pytest.fixture(scope="session")
def fig2_ctx(fig2_cfg):
    return runs.build_context(fig2_cfg)


@pytest.fixture(scope="session")
def fig2_results(fig2_cfg):
    """Full three-tier reference run (the expensive one)."""
    return runs.run_fig2(fig2_cfg)
