# utils/calibration/profiles_io.py
"""
Volume panel and market profile files

Panel CSV (long format, one row per cell): ``day,period,asset,dvol``
Profiles CSV: ``period,avg_vol_alloc,avg_correl`` where avg_correl may be
the token ``missing``.
"""

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from ..errors import FormatError, InvalidModelError
from ..table_io import MISSING_TOKEN, csv_line, integer_column, numeric_column, read_table, write_table
from .profiles import MarketProfiles, VolumePanel

PANEL_COLUMNS = ("day", "period", "asset", "dvol")
PROFILE_COLUMNS = ("period", "avg_vol_alloc", "avg_correl")


def read_panel_csv(path: Union[str, Path]) -> VolumePanel:
    """
    Read a long-format panel; every (day, period, asset) cell must appear once.

    Returns:
        VolumePanel with sorted days and periods and assets in first-seen order
    """
    path = Path(path)
    frame = read_table(path, PANEL_COLUMNS)
    if len(frame) == 0:
        raise FormatError(str(path), "panel has no rows")
    days = integer_column(frame, "day", path)
    periods = integer_column(frame, "period", path)
    dvol = numeric_column(frame, "dvol", path)
    negative = np.flatnonzero(dvol < 0)
    if negative.size:
        raise FormatError(str(path), "negative volume", row=csv_line(frame.index[negative[0]]), column="dvol")

    day_labels, day_index = np.unique(days, return_inverse=True)
    period_labels, period_index = np.unique(periods, return_inverse=True)
    asset_index, asset_labels = pd.factorize(frame["asset"])
    shape = (day_labels.size, period_labels.size, len(asset_labels))

    flat = np.ravel_multi_index((day_index, period_index, asset_index), shape)
    seen, first = np.unique(flat, return_index=True)
    if seen.size != flat.size:
        duplicate = np.setdiff1d(np.arange(flat.size), first)[0]
        raise FormatError(str(path), "duplicate (day, period, asset) cell", row=csv_line(frame.index[duplicate]))
    if seen.size != np.prod(shape):
        raise FormatError(str(path), f"panel is incomplete: {seen.size} of {int(np.prod(shape))} cells present")

    cube = np.empty(np.prod(shape))
    cube[flat] = dvol
    try:
        return VolumePanel(cube.reshape(shape), tuple(int(d) for d in day_labels),
                           tuple(int(p) for p in period_labels), tuple(str(a) for a in asset_labels))
    except InvalidModelError as exc:
        raise FormatError(str(path), str(exc)) from None


def write_panel_csv(path: Union[str, Path], panel: VolumePanel) -> Path:
    D, T, N = panel.shape
    return write_table(path, {
        "day": np.repeat(panel.days, T * N),
        "period": np.tile(np.repeat(panel.periods, N), D),
        "asset": np.tile(np.asarray(panel.assets, dtype=object), D * T),
        "dvol": panel.dvol.ravel(),
    })


def read_profiles_csv(path: Union[str, Path]) -> MarketProfiles:
    path = Path(path)
    frame = read_table(path, PROFILE_COLUMNS)
    if len(frame) == 0:
        raise FormatError(str(path), "profiles file has no periods")
    periods = integer_column(frame, "period", path)
    if not np.array_equal(periods, np.arange(1, len(frame) + 1)):
        raise FormatError(str(path), "periods must be numbered 1..T in order")
    vol = numeric_column(frame, "avg_vol_alloc", path)
    correl = numeric_column(frame, "avg_correl", path, allow_missing=True)
    try:
        return MarketProfiles(vol, tuple(None if np.isnan(c) else float(c) for c in correl))
    except InvalidModelError as exc:
        raise FormatError(str(path), str(exc)) from None


def write_profiles_csv(path: Union[str, Path], profiles: MarketProfiles) -> Path:
    return write_table(path, {
        "period": list(range(1, profiles.periods + 1)),
        "avg_vol_alloc": profiles.avg_vol_alloc,
        "avg_correl": [MISSING_TOKEN if c is None else c for c in profiles.avg_correl],
    })
