# utils/orderflow/simulator.py
"""
Order-Flow Simulator
Draws volume panels from the compound-Poisson model and evaluates the
model's closed-form moments
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..calibration.profiles import VolumePanel
from ..errors import InvalidModelError
from ..logger_setup import setup_logger
from .params import OrderFlowParams

logger = setup_logger(name="orderflow", level=logging.INFO)

CHUNK_DAYS = 1000


@dataclass(frozen=True)
class OrderFlowMoments:
    mean: np.ndarray  # (T, N)
    var: np.ndarray  # (T, N)
    cov: np.ndarray  # (T, N, N), diagonal = var
    correl: np.ndarray  # (T, N, N), NaN where a period carries no variance
    vol_alloc: np.ndarray  # (T, N)
    theta_i: np.ndarray  # (N,)

    def avg_correl(self) -> np.ndarray:
        """Average over ordered pairs i ≠ j, per period."""
        T, N, _ = self.correl.shape
        if N < 2:
            raise InvalidModelError("pairwise correlations need at least two assets")
        mask = ~np.eye(N, dtype=bool)
        return np.array([self.correl[t][mask].mean() for t in range(T)])


def theoretical_moments(params: OrderFlowParams) -> OrderFlowMoments:
    """
    Closed-form moments of DVol_idt.

    Returns:
        Mean, variance, covariance, correlation and volume allocation per period
    """
    lam, cv2 = params.lam, params.cv ** 2
    alpha = params.alpha[:, None]
    beta = params.beta[:, None]
    q_id, w, q_f = params.qbar_id[None, :], params.w_tilde[None, :], params.qbar_f

    mean = alpha * lam * q_id + beta * lam * w * q_f
    var = lam * (1.0 + cv2) * (alpha * q_id ** 2 + beta * (w * q_f) ** 2)
    fund_scale = w[0] * q_f
    cov = lam * (1.0 + cv2) * params.beta[:, None, None] * np.outer(fund_scale, fund_scale)[None, :, :]
    T, N = mean.shape
    diagonal = np.arange(N)
    cov[:, diagonal, diagonal] = var

    theta = params.theta_i()
    spread = np.sqrt(alpha * (1.0 - theta) ** 2 + beta * theta ** 2)  # (T, N)
    numerator = params.beta[:, None, None] * np.outer(theta, theta)[None, :, :]
    denominator = spread[:, :, None] * spread[:, None, :]
    correl = np.divide(numerator, denominator, out=np.full_like(numerator, np.nan), where=denominator > 0)
    correl[:, diagonal, diagonal] = np.where(spread > 0, 1.0, np.nan)

    vol_alloc = alpha * (1.0 - theta) + beta * theta
    return OrderFlowMoments(mean, var, cov, correl, vol_alloc, theta)


def day_generator(seed: int, day: int) -> np.random.Generator:
    """Independent counter-based stream for one day, keyed by (seed, day)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(day,))))


def _compound_sizes(rng: np.random.Generator, counts: np.ndarray, qbar, cv: float) -> np.ndarray:
    """
    Sum of `counts` i.i.d. gamma order sizes with mean qbar and CV cv.

    A sum of n Gamma(1/cv², qbar·cv²) variates is Gamma(n/cv², qbar·cv²).
    """
    if cv == 0:
        return counts * qbar
    scale = np.broadcast_to(qbar * cv * cv, counts.shape)
    return rng.gamma(counts / (cv * cv), scale)


def simulate_day(params: OrderFlowParams, seed: int, day: int) -> np.ndarray:
    """DVol[t, i] for one day; the fund flow of period t is shared by every asset."""
    rng = day_generator(seed, day)
    T, N = params.periods, params.n_assets
    n_id = rng.poisson(np.broadcast_to(params.alpha[:, None] * params.lam, (T, N)))
    n_f = rng.poisson(params.beta * params.lam)
    q_id = _compound_sizes(rng, n_id, params.qbar_id[None, :], params.cv)
    q_f = _compound_sizes(rng, n_f, params.qbar_f, params.cv)
    return q_id + params.w_tilde[None, :] * q_f[:, None]


def simulate_panel(params: OrderFlowParams, days: int, seed: int, workers: int = 1,
                   progress: bool = True, assets: Optional[Sequence[str]] = None) -> VolumePanel:
    """
    Simulate a (days, periods, assets) volume panel.

    Args:
        params: Order-flow parameters
        days: Number of days D ≥ 1
        seed: Root seed; the day at index d (labelled d + 1) uses the stream keyed by (seed, d)
        workers: Threads over day chunks (the panel does not depend on it)
        progress: Show a tqdm progress bar
        assets: Optional asset labels

    Returns:
        VolumePanel with days numbered 1..D
    """
    if days < 1:
        raise InvalidModelError(f"need at least one day, got {days}")
    workers = max(1, int(workers))
    dvol = np.empty((days, params.periods, params.n_assets))

    def run_chunk(start: int) -> int:
        stop = min(start + CHUNK_DAYS, days)
        for d in range(start, stop):
            dvol[d] = simulate_day(params, seed, d)
        return stop - start

    starts = range(0, days, CHUNK_DAYS)
    logger.info(f"Simulating {days} days x {params.periods} periods x {params.n_assets} assets "
                f"(seed {seed}, {workers} worker(s))")
    with tqdm(total=days, desc="Simulating days", unit="day", disable=not progress) as bar:
        if workers == 1:
            for start in starts:
                bar.update(run_chunk(start))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for finished in pool.map(run_chunk, starts):
                    bar.update(finished)
    return VolumePanel(dvol, assets=tuple(assets) if assets is not None else ())
