# utils/analysis/report_io.py
"""
Cost-ratio report (key = value) and η₁ sweep (CSV) files
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..kv_format import read_kv, write_kv
from ..table_io import numeric_column, read_table, write_table
from .cost_ratio import CostRatioReport, ExtremeRatios

SWEEP_COLUMNS = ("eta1", "upsilon_market", "upsilon_orth")


def report_values(report: CostRatioReport, extremes: ExtremeRatios,
                  theta_bound: Optional[float], thresholds: Dict[str, float]) -> Dict[str, object]:
    """Flatten an analysis into the ordered key set of the report file."""
    values = {
        "upsilon": report.upsilon,
        "eta1": report.eta1,
        "theta": report.theta,
        "delta": report.delta,
        "delta_sign": "positive" if report.delta > 0 else "negative" if report.delta < 0 else "zero",
        "base_term": report.base_term,
        "tilt_term": report.tilt_term,
        "orthogonal_target": report.orthogonal,
        "gamma": report.gamma,
        "upsilon_market": extremes.upsilon_market,
        "upsilon_orth": extremes.upsilon_orth,
        "which_is_max": extremes.which_is_max,
        "theta_bound": theta_bound,
    }
    values.update(thresholds)
    return values


def write_report(path: Union[str, Path], values: Dict[str, object]) -> Path:
    return write_kv(path, values, header="cost ratio of separable vs coupled execution")


def read_report(path: Union[str, Path]) -> Dict[str, str]:
    return read_kv(path)


def write_sweep_csv(path: Union[str, Path], curve: Sequence[Tuple[float, float]], upsilon_orth: float) -> Path:
    return write_table(path, {
        "eta1": [eta for eta, _ in curve],
        "upsilon_market": [value for _, value in curve],
        "upsilon_orth": [upsilon_orth] * len(curve),
    })


def read_sweep_csv(path: Union[str, Path]) -> List[Tuple[float, float, float]]:
    frame = read_table(path, SWEEP_COLUMNS)
    columns = [numeric_column(frame, name, path) for name in SWEEP_COLUMNS]
    return [tuple(float(c[i]) for c in columns) for i in range(len(frame))]


def eta_grid(start: float, stop: float, count: int, include: Sequence[float] = ()) -> np.ndarray:
    """Evenly spaced η₁ grid with extra points merged in (sorted, unique)."""
    grid = np.linspace(start, stop, count) if count > 0 else np.zeros(0)
    return np.unique(np.concatenate([grid, np.asarray(include, dtype=float)]))
