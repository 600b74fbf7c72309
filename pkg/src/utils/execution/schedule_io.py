# utils/execution/schedule_io.py
"""
Schedule and mixture-profile files

Schedule CSV: ``period,<asset>,...`` with one row per period (1..T) and a
trailing ``total`` row holding the column sums, which must equal x0.

Mixture profile CSV: ``period,alpha,beta,theta`` with theta repeated on
every row.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import FormatError, InfeasibleScheduleError, InvalidModelError
from ..table_io import csv_line, integer_column, numeric_column, read_table, write_table
from .schedule import MixtureProfile, Schedule, inventory_tolerance

TOTAL_ROW = "total"


def write_schedule_csv(path: Union[str, Path], schedule: Schedule,
                       assets: Optional[Sequence[str]] = None) -> Path:
    """Write a schedule plus its checksum row."""
    assets = list(assets) if assets is not None else [f"asset_{i + 1}" for i in range(schedule.n_assets)]
    if len(assets) != schedule.n_assets:
        raise FormatError(str(path), f"{len(assets)} labels for {schedule.n_assets} assets")
    columns = {"period": [*(str(t) for t in range(1, schedule.periods + 1)), TOTAL_ROW]}
    checksum = schedule.checksum()
    for i, asset in enumerate(assets):
        columns[asset] = np.append(schedule.v[:, i], checksum[i])
    return write_table(path, columns)


def read_schedule_csv(path: Union[str, Path]) -> Tuple[Schedule, List[str]]:
    """
    Read a schedule; the checksum row becomes x0.

    Returns:
        (schedule, asset labels)
    """
    path = Path(path)
    frame = read_table(path, ["period"])
    assets = [c for c in frame.columns if c != "period"]
    if not assets:
        raise FormatError(str(path), "no asset columns")
    if len(frame) < 2 or frame["period"].iloc[-1] != TOTAL_ROW:
        raise FormatError(str(path), f"last row must be the '{TOTAL_ROW}' checksum row")
    body = frame.iloc[:-1]
    periods = integer_column(body, "period", path)
    if not np.array_equal(periods, np.arange(1, len(body) + 1)):
        raise FormatError(str(path), "periods must be numbered 1..T in order")

    v = np.column_stack([numeric_column(body, a, path) for a in assets])
    checksum = np.array([numeric_column(frame.iloc[-1:], a, path)[0] for a in assets])
    gap = np.abs(v.sum(axis=0) - checksum)
    if np.any(gap > inventory_tolerance(checksum)):
        column = assets[int(np.argmax(gap))]
        raise FormatError(str(path), "checksum row does not match the period rows",
                          row=csv_line(len(frame) - 1), column=column)
    try:
        return Schedule(v, checksum, label=path.stem), assets
    except InfeasibleScheduleError as exc:
        raise FormatError(str(path), str(exc)) from None


def write_profile_csv(path: Union[str, Path], profile: MixtureProfile) -> Path:
    return write_table(path, {
        "period": list(range(1, profile.periods + 1)),
        "alpha": profile.alpha,
        "beta": profile.beta,
        "theta": [profile.theta] * profile.periods,
    })


def read_profile_csv(path: Union[str, Path]) -> MixtureProfile:
    path = Path(path)
    frame = read_table(path, ["period", "alpha", "beta", "theta"])
    if len(frame) == 0:
        raise FormatError(str(path), "profile has no periods")
    periods = integer_column(frame, "period", path)
    if not np.array_equal(periods, np.arange(1, len(frame) + 1)):
        raise FormatError(str(path), "periods must be numbered 1..T in order")
    theta = numeric_column(frame, "theta", path)
    if np.any(theta != theta[0]):
        row = int(np.flatnonzero(theta != theta[0])[0])
        raise FormatError(str(path), "theta differs between rows", row=csv_line(row), column="theta")
    try:
        return MixtureProfile(theta[0], numeric_column(frame, "alpha", path), numeric_column(frame, "beta", path))
    except InvalidModelError as exc:
        raise FormatError(str(path), str(exc)) from None
