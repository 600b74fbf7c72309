# utils/orderflow/params.py
"""
Parameters of the compound-Poisson order-flow model

On day d and period t, asset i sees N_id ~ Poisson(α_tΛ) single-stock
orders of mean notional q̄_id,i and a |w̃_i| share of N_f ~ Poisson(β_tΛ)
index-fund orders of mean notional q̄_f; every order size has coefficient
of variation c_v.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatchError, InvalidModelError
from ..execution.schedule import MixtureProfile


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True).ravel()
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class OrderFlowParams:
    lam: float
    cv: float
    qbar_id: np.ndarray
    qbar_f: float
    w_tilde: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        qbar_id, w_tilde = _frozen(self.qbar_id), _frozen(self.w_tilde)
        alpha, beta = _frozen(self.alpha), _frozen(self.beta)
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise InvalidModelError(f"arrival intensity must be positive, got {self.lam}")
        if not np.isfinite(self.cv) or self.cv < 0:
            raise InvalidModelError(f"coefficient of variation must be non-negative, got {self.cv}")
        if not np.isfinite(self.qbar_f) or self.qbar_f <= 0:
            raise InvalidModelError(f"mean fund order size must be positive, got {self.qbar_f}")
        if qbar_id.size < 1 or qbar_id.size != w_tilde.size:
            raise DimensionMismatchError(f"{qbar_id.size} order sizes but {w_tilde.size} fund weights")
        if not np.all(np.isfinite(qbar_id)) or np.any(qbar_id <= 0):
            raise InvalidModelError("mean single-stock order sizes must be positive")
        if not np.all(np.isfinite(w_tilde)) or np.any(w_tilde < 0):
            raise InvalidModelError("fund ownership weights must be non-negative")
        # validates the intensity profiles (non-negative, unit sums)
        MixtureProfile(0.0, alpha, beta)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "cv", float(self.cv))
        object.__setattr__(self, "qbar_f", float(self.qbar_f))
        for name, value in (("qbar_id", qbar_id), ("w_tilde", w_tilde), ("alpha", alpha), ("beta", beta)):
            object.__setattr__(self, name, value)

    @property
    def n_assets(self) -> int:
        return self.qbar_id.size

    @property
    def periods(self) -> int:
        return self.alpha.size

    def theta_i(self) -> np.ndarray:
        """Index-fund share of each asset's daily volume, |w̃_i|q̄_f/(q̄_id,i + |w̃_i|q̄_f)."""
        fund = self.w_tilde * self.qbar_f
        return fund / (self.qbar_id + fund)

    def homogeneous_theta(self, tolerance: float = 1e-12) -> Optional[float]:
        """The common θ when every asset has the same fund share, else None."""
        theta = self.theta_i()
        if np.max(theta) - np.min(theta) <= tolerance:
            return float(theta.mean())
        return None

    def profile(self) -> MixtureProfile:
        """Mixture profile of a homogeneous parameter set."""
        theta = self.homogeneous_theta()
        if theta is None:
            raise InvalidModelError("fund shares differ across assets; there is no single theta")
        return MixtureProfile(theta, self.alpha, self.beta)

    @classmethod
    def homogeneous(cls, profile: MixtureProfile, lam: float, cv: float, qbar_f: float,
                    w_tilde) -> "OrderFlowParams":
        """
        Parameters whose fund share equals profile.theta for every asset.

        q̄_id,i = |w̃_i|q̄_f(1−θ)/θ, so θ must lie strictly inside (0, 1)
        and every asset must be held by the fund.
        """
        w_tilde = np.asarray(w_tilde, dtype=float)
        theta = profile.theta
        if not 0.0 < theta < 1.0:
            raise InvalidModelError(f"a homogeneous parameter set needs 0 < theta < 1, got {theta}")
        if np.any(w_tilde <= 0):
            raise InvalidModelError("every asset needs a positive fund weight for a common theta")
        qbar_id = w_tilde * qbar_f * (1.0 - theta) / theta
        return cls(lam, cv, qbar_id, qbar_f, w_tilde, profile.alpha, profile.beta)
