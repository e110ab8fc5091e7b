"""Shared fixtures for the test suite."""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from inference.model import ProblemParams  # noqa: E402


@pytest.fixture
def reference_params() -> ProblemParams:
    """d=1000, s=100, sigma=1, alpha=0.05, alpha'=alpha/2, delta=0.7 at a/sigma=5."""
    return ProblemParams(d=1000, s=100, a=5.0, sigma=1.0, alpha=0.05, alpha_prime=0.025, delta=0.7)


@pytest.fixture
def small_params() -> ProblemParams:
    return ProblemParams(d=200, s=10, a=5.0, sigma=1.0, alpha=0.05, alpha_prime=0.025, delta=0.7)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo runs at the d=1000 reference design")
