# utils/kv_format.py
"""
Flat ``key = value`` text files

Used for order-flow parameters, impact coefficients, cost-ratio reports and
run summaries. Floats are written with 17 significant digits so that every
file re-parses to the identical value; vectors are comma separated.
"""

from pathlib import Path
from typing import Dict, List, Mapping, Union

import numpy as np

from .errors import FormatError

Value = Union[str, int, float, bool, np.ndarray, List[float], None]


def format_float(value: float) -> str:
    """Lossless text form of a float."""
    return f"{float(value):.17g}"


def format_value(value: Value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ", ".join(format_float(v) for v in np.asarray(value, dtype=float).ravel())
    return str(value)


def write_kv(path: Union[str, Path], values: Mapping[str, Value], header: str = "") -> Path:
    """Write a flat key = value file and return its path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {line}" for line in header.splitlines() if line]
    lines += [f"{key} = {format_value(value)}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_kv(path: Union[str, Path]) -> Dict[str, str]:
    """Parse a key = value file into raw strings; '#' starts a comment line."""
    path = Path(path)
    if not path.exists():
        raise FormatError(str(path), "file not found")
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(str(path), f"expected 'key = value', got {line!r}", row=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FormatError(str(path), "empty key", row=lineno)
        if key in values:
            raise FormatError(str(path), f"duplicate key {key!r}", row=lineno)
        values[key] = value
    return values


def parse_float(values: Mapping[str, str], key: str, path: Union[str, Path]) -> float:
    if key not in values:
        raise FormatError(str(path), f"missing key {key!r}")
    try:
        return float(values[key])
    except ValueError:
        raise FormatError(str(path), f"key {key!r} is not a number: {values[key]!r}") from None


def parse_vector(values: Mapping[str, str], key: str, path: Union[str, Path]) -> np.ndarray:
    if key not in values:
        raise FormatError(str(path), f"missing key {key!r}")
    text = values[key].strip()
    if not text:
        return np.zeros(0)
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError:
        raise FormatError(str(path), f"key {key!r} is not a list of numbers") from None
