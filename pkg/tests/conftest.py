"""Shared fixtures: hand-checkable models and random-instance factories."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from utils.execution.schedule import MixtureProfile  # noqa: E402
from utils.impact.liquidity import IntradayLiquidity, LiquidityModel  # noqa: E402


def random_model(rng: np.random.Generator, n_assets: int, n_funds: int) -> LiquidityModel:
    return LiquidityModel(
        rng.uniform(0.5, 2.0, n_assets),
        rng.uniform(0.5, 2.0, n_funds),
        rng.uniform(0.0, 1.0, (n_assets, n_funds)),
    )


def random_intraday(rng: np.random.Generator, periods: int, n_assets: int, n_funds: int) -> IntradayLiquidity:
    W = rng.uniform(0.0, 1.0, (n_assets, n_funds))
    return IntradayLiquidity(tuple(
        LiquidityModel(rng.uniform(0.5, 2.0, n_assets), rng.uniform(0.5, 2.0, n_funds), W)
        for _ in range(periods)
    ))


def random_profile(rng: np.random.Generator, periods: int, theta=None) -> MixtureProfile:
    theta = rng.uniform(0.05, 0.95) if theta is None else theta
    return MixtureProfile.normalized(theta, rng.dirichlet(np.ones(periods)), rng.dirichlet(np.ones(periods)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hand_daily():
    """Ψ̄_id = I, ψ̄_f = 1, w = (1, 1)."""
    return LiquidityModel([1.0, 1.0], [1.0], [[1.0], [1.0]])


@pytest.fixture
def hand_profile():
    """θ = 0.5, α = (0.5, 0.5), β = (0, 1): all fund flow arrives in the second period."""
    return MixtureProfile(0.5, [0.5, 0.5], [0.0, 1.0])


@pytest.fixture
def smooth_profile():
    """Same θ and α with β = (0.25, 0.75), so every β_t is positive."""
    return MixtureProfile(0.5, [0.5, 0.5], [0.25, 0.75])


@pytest.fixture
def u_shaped_profile():
    """U-shaped α and end-of-day-concentrated β with θ = 0.21."""
    t = np.arange(13)
    alpha = 1.0 + 2.0 * ((t - 6) / 6.0) ** 2
    beta = 1.0 + 6.0 * (t / 12.0) ** 4
    return MixtureProfile.normalized(0.21, alpha, beta)
