# utils/impact/liquidity.py
"""
Liquidity primitives of the cross-impact model

A LiquidityModel holds the single-stock liquidity diagonal Ψ_id, the
index-fund liquidity diagonal Ψ_f and the fund weight matrix W (shares).
The total liquidity Ψ_id + WΨ_fWᵀ maps price changes to the shares
natural liquidity providers absorb; its inverse is the impact matrix G.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DimensionMismatchError, InvalidModelError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Infeasible:
    """An explicit 'cost is +infinity' outcome."""
    reason: str
    residual: Optional[float] = None

    def __bool__(self) -> bool:
        return False


CostResult = Union[float, Infeasible]


@dataclass(frozen=True)
class LiquidityModel:
    """
    Per-period (or daily-total) liquidity primitives.

    psi_id: (N,) single-stock liquidity, shares per dollar of price move
    psi_f:  (K,) index-fund liquidity, fund units per dollar of fund-price move
    W:      (N, K) fund weights in shares, column k is w_k

    Zero liquidity entries are allowed so that parametric scalings with a
    vanishing intensity stay representable; operations that need G check
    strict positivity themselves.
    """
    psi_id: np.ndarray
    psi_f: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        psi_id = np.asarray(self.psi_id, dtype=float).ravel()
        psi_f = np.asarray(self.psi_f, dtype=float).ravel()
        W = np.asarray(self.W, dtype=float)
        if W.size == 0:
            W = W.reshape(psi_id.size, 0)
        if W.ndim == 1:
            W = W.reshape(-1, 1)

        if psi_id.size < 1:
            raise InvalidModelError("a liquidity model needs at least one asset")
        if W.shape[0] != psi_id.size:
            raise DimensionMismatchError(f"W has {W.shape[0]} rows but psi_id has {psi_id.size} entries")
        if W.shape[1] != psi_f.size:
            raise DimensionMismatchError(f"W has {W.shape[1]} columns but psi_f has {psi_f.size} entries")
        for name, values in (("psi_id", psi_id), ("psi_f", psi_f), ("W", W)):
            if not np.all(np.isfinite(values)):
                raise InvalidModelError(f"{name} contains non-finite values")
        if np.any(psi_id < 0) or np.any(psi_f < 0):
            raise InvalidModelError("liquidity entries must be non-negative")
        if W.shape[1] > W.shape[0]:
            raise InvalidModelError(f"K={W.shape[1]} funds exceed N={W.shape[0]} assets")
        if W.shape[1] and np.linalg.matrix_rank(W) < W.shape[1]:
            raise InvalidModelError("fund weight vectors are linearly dependent")

        object.__setattr__(self, "psi_id", _frozen(psi_id))
        object.__setattr__(self, "psi_f", _frozen(psi_f))
        object.__setattr__(self, "W", _frozen(W))

    @property
    def n_assets(self) -> int:
        return self.psi_id.size

    @property
    def n_funds(self) -> int:
        return self.psi_f.size

    def require_positive_single_stock(self, operation: str) -> None:
        if not np.all(self.psi_id > 0):
            raise InvalidModelError(f"{operation} requires every psi_id to be strictly positive")

    def check_trade(self, v: Sequence[float], name: str = "trade vector") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_assets,):
            raise DimensionMismatchError(f"{name} has shape {v.shape}, expected ({self.n_assets},)")
        if not np.all(np.isfinite(v)):
            raise InvalidModelError(f"{name} contains non-finite values")
        return v

    def scaled(self, alpha: float, beta: float) -> "LiquidityModel":
        """Parametric scaling (αΨ_id, βΨ_f) with W unchanged."""
        return LiquidityModel(alpha * self.psi_id, beta * self.psi_f, self.W)

    def single_stock_part(self, delta_p: np.ndarray) -> np.ndarray:
        """Ψ_id Δp: shares supplied by single-stock investors."""
        return self.psi_id * delta_p

    def fund_part(self, delta_p: np.ndarray) -> np.ndarray:
        """WΨ_fWᵀ Δp: shares supplied by index-fund investors."""
        return self.W @ (self.psi_f * (self.W.T @ delta_p))

    def liquidity_matrix(self) -> np.ndarray:
        """Dense total liquidity Ψ_id + WΨ_fWᵀ."""
        return np.diag(self.psi_id) + (self.W * self.psi_f) @ self.W.T

    def same_structure(self, other: "LiquidityModel") -> bool:
        return self.W.shape == other.W.shape and np.array_equal(self.W, other.W)


@dataclass(frozen=True)
class IntradayLiquidity:
    """T per-period liquidity models sharing dimensions and fund weights."""
    per_period: Tuple[LiquidityModel, ...]
    _total: LiquidityModel = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        periods = tuple(self.per_period)
        if not periods:
            raise InvalidModelError("intraday liquidity needs at least one period")
        first = periods[0]
        for t, model in enumerate(periods[1:], start=2):
            if not first.same_structure(model):
                raise InvalidModelError(f"period {t} does not share the fund weights of period 1")
        object.__setattr__(self, "per_period", periods)
        total = LiquidityModel(
            np.sum([m.psi_id for m in periods], axis=0),
            np.sum([m.psi_f for m in periods], axis=0) if first.n_funds else np.zeros(0),
            first.W,
        )
        object.__setattr__(self, "_total", total)

    @classmethod
    def from_profile(cls, daily: LiquidityModel, alpha: Sequence[float], beta: Sequence[float]) -> "IntradayLiquidity":
        """Ψ_id,t = α_tΨ̄_id and Ψ_f,t = β_tΨ̄_f."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if alpha.shape != beta.shape:
            raise DimensionMismatchError("alpha and beta profiles differ in length")
        return cls(tuple(daily.scaled(a, b) for a, b in zip(alpha, beta)))

    @property
    def periods(self) -> int:
        return len(self.per_period)

    @property
    def n_assets(self) -> int:
        return self.per_period[0].n_assets

    @property
    def n_funds(self) -> int:
        return self.per_period[0].n_funds

    @property
    def W(self) -> np.ndarray:
        return self.per_period[0].W

    def total(self) -> LiquidityModel:
        """Ψ̄_id = Σ_tΨ_id,t and Ψ̄_f = Σ_tΨ_f,t."""
        return self._total

    def __iter__(self):
        return iter(self.per_period)

    def __len__(self) -> int:
        return self.periods

    def __getitem__(self, t: int) -> LiquidityModel:
        return self.per_period[t]


@dataclass(frozen=True)
class PriceState:
    """Arrival prices p (dollars per share), all strictly positive."""
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        if p.size == 0 or not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise InvalidModelError("arrival prices must be finite and strictly positive")
        object.__setattr__(self, "p", _frozen(p))

    @property
    def n_assets(self) -> int:
        return self.p.size
