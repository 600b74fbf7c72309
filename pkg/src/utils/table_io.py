# utils/table_io.py
"""
CSV table helpers shared by every ``*_io`` module

Cells are read as text and converted with exact float parsing; writes use
17 significant digits, so numbers survive a write/read cycle unchanged.
Every parse failure becomes a FormatError naming the file line and column.
"""

from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import FormatError

FLOAT_FORMAT = "%.17g"
MISSING_TOKEN = "missing"


def csv_line(index: int) -> int:
    """File line of a data row (the header is line 1)."""
    return int(index) + 2


def read_table(path: Union[str, Path], required: Sequence[str]) -> pd.DataFrame:
    """
    Read a CSV as strings and check its header.

    Args:
        path: CSV file
        required: Column names that must be present

    Returns:
        DataFrame of stripped string cells
    """
    path = Path(path)
    if not path.exists():
        raise FormatError(str(path), "file not found")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise FormatError(str(path), "file is empty") from None
    except pd.errors.ParserError as exc:
        raise FormatError(str(path), f"malformed CSV: {exc}") from None

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise FormatError(str(path), f"missing column(s) {missing}; found {list(frame.columns)}")
    frame = frame.apply(lambda column: column.str.strip())
    for column in frame.columns:
        empty = frame.index[frame[column] == ""]
        if len(empty):
            raise FormatError(str(path), "empty cell", row=csv_line(empty[0]), column=column)
    return frame


def numeric_column(frame: pd.DataFrame, column: str, path: Union[str, Path],
                   allow_missing: bool = False) -> np.ndarray:
    """
    Convert one string column to float64.

    With allow_missing the token 'missing' becomes NaN; any other
    non-numeric cell raises FormatError.
    """
    values = frame[column]
    if allow_missing:
        values = values.where(values != MISSING_TOKEN, "nan")
    try:
        converted = values.astype(float).to_numpy()
    except ValueError:
        for index, cell in values.items():
            try:
                float(cell)
            except ValueError:
                raise FormatError(str(path), f"not a number: {cell!r}", row=csv_line(index), column=column) from None
        raise
    bad = ~np.isfinite(converted)
    if allow_missing:
        bad &= (frame[column] != MISSING_TOKEN).to_numpy()
    if bad.any():
        index = frame.index[np.flatnonzero(bad)[0]]
        raise FormatError(str(path), "non-finite value", row=csv_line(index), column=column)
    return converted


def integer_column(frame: pd.DataFrame, column: str, path: Union[str, Path]) -> np.ndarray:
    values = numeric_column(frame, column, path)
    rounded = np.rint(values)
    bad = np.flatnonzero(rounded != values)
    if bad.size:
        raise FormatError(str(path), "expected an integer", row=csv_line(frame.index[bad[0]]), column=column)
    return rounded.astype(int)


def write_table(path: Union[str, Path], columns: Dict[str, Iterable], order: Optional[Sequence[str]] = None) -> Path:
    """Write columns to CSV with lossless float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({name: list(values) for name, values in columns.items()})
    if order is not None:
        frame = frame[list(order)]
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
