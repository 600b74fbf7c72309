# utils/impact/liquidity_io.py
"""
Liquidity model files

Daily / per-period model (one row per asset, one metadata row):

    asset,psi_id,w_1,...,w_K
    AAA,1,1
    BBB,1,1
    __psi_f__,,1

Intraday models add a leading ``period`` column (1..T) and repeat the block
per period; the fund weights must agree across periods. Targets use
``asset,x0``.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import FormatError, InvalidModelError
from ..table_io import csv_line, integer_column, numeric_column, read_table, write_table
from .liquidity import IntradayLiquidity, LiquidityModel

PSI_F_ROW = "__psi_f__"


def fund_columns(frame: pd.DataFrame, path: Path) -> List[str]:
    columns = [c for c in frame.columns if c.startswith("w_")]
    expected = [f"w_{k}" for k in range(1, len(columns) + 1)]
    if columns != expected:
        raise FormatError(str(path), f"fund columns must be {expected}, found {columns}")
    return columns


def _parse_block(frame: pd.DataFrame, path: Path) -> Tuple[LiquidityModel, List[str]]:
    w_cols = fund_columns(frame, path)
    meta = frame[frame["asset"] == PSI_F_ROW]
    assets = frame[frame["asset"] != PSI_F_ROW]
    if len(assets) == 0:
        raise FormatError(str(path), "no asset rows")
    if assets["asset"].duplicated().any():
        duplicate = assets.index[assets["asset"].duplicated()][0]
        raise FormatError(str(path), "duplicate asset", row=csv_line(duplicate), column="asset")
    if w_cols and len(meta) != 1:
        raise FormatError(str(path), f"expected exactly one '{PSI_F_ROW}' row, found {len(meta)}")

    for column in ["psi_id", *w_cols]:
        empty = assets.index[assets[column] == ""]
        if len(empty):
            raise FormatError(str(path), "empty cell", row=csv_line(empty[0]), column=column)

    psi_id = numeric_column(assets, "psi_id", path)
    W = np.column_stack([numeric_column(assets, c, path) for c in w_cols]) if w_cols else np.zeros((len(assets), 0))
    psi_f = np.array([numeric_column(meta, c, path)[0] for c in w_cols]) if w_cols else np.zeros(0)
    try:
        model = LiquidityModel(psi_id, psi_f, W)
    except InvalidModelError as exc:
        raise FormatError(str(path), str(exc)) from None
    return model, assets["asset"].tolist()


def _read_liquidity_frame(path: Union[str, Path], required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FormatError(str(path), "file not found")
    # The metadata row leaves psi_id empty, so empty cells are checked per row kind.
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise FormatError(str(path), f"malformed CSV: {exc}") from None
    frame.columns = [str(c).strip() for c in frame.columns]
    frame = frame.apply(lambda column: column.str.strip())
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise FormatError(str(path), f"missing column(s) {missing}; found {list(frame.columns)}")
    return frame


def read_liquidity_csv(path: Union[str, Path]) -> Tuple[LiquidityModel, List[str]]:
    """
    Read a daily or single-period liquidity model.

    Returns:
        (model, asset labels in file order)
    """
    path = Path(path)
    frame = _read_liquidity_frame(path, ["asset", "psi_id"])
    if "period" in frame.columns:
        raise FormatError(str(path), "file has a 'period' column; read it with read_intraday_csv")
    return _parse_block(frame, path)


def read_intraday_csv(path: Union[str, Path]) -> Tuple[IntradayLiquidity, List[str]]:
    """Read a per-period liquidity file (periods numbered 1..T)."""
    path = Path(path)
    frame = _read_liquidity_frame(path, ["period", "asset", "psi_id"])
    periods = integer_column(frame, "period", path)
    expected = np.arange(1, periods.max() + 1) if periods.size else np.zeros(0)
    if periods.size == 0 or not np.array_equal(np.unique(periods), expected):
        raise FormatError(str(path), "periods must be numbered 1..T without gaps")

    models, labels = [], None
    for t in expected:
        block = frame[periods == t].drop(columns="period")
        model, assets = _parse_block(block, path)
        if labels is None:
            labels = assets
        elif assets != labels:
            raise FormatError(str(path), f"period {t} lists assets {assets}, expected {labels}")
        models.append(model)
    try:
        return IntradayLiquidity(tuple(models)), labels
    except InvalidModelError as exc:
        raise FormatError(str(path), str(exc)) from None


def _block_columns(model: LiquidityModel, assets: Sequence[str]) -> dict:
    columns = {
        "asset": [*assets, PSI_F_ROW] if model.n_funds else list(assets),
        "psi_id": [*model.psi_id, ""] if model.n_funds else list(model.psi_id),
    }
    for k in range(model.n_funds):
        columns[f"w_{k + 1}"] = [*model.W[:, k], model.psi_f[k]]
    return columns


def default_labels(n_assets: int) -> List[str]:
    return [f"asset_{i + 1}" for i in range(n_assets)]


def write_liquidity_csv(path: Union[str, Path], model: LiquidityModel,
                        assets: Optional[Sequence[str]] = None) -> Path:
    assets = list(assets) if assets is not None else default_labels(model.n_assets)
    return write_table(path, _block_columns(model, assets))


def write_intraday_csv(path: Union[str, Path], liq: IntradayLiquidity,
                       assets: Optional[Sequence[str]] = None) -> Path:
    assets = list(assets) if assets is not None else default_labels(liq.n_assets)
    columns = {}
    for t, model in enumerate(liq, start=1):
        block = _block_columns(model, assets)
        block = {"period": [t] * len(block["asset"]), **block}
        for name, values in block.items():
            columns.setdefault(name, []).extend(values)
    return write_table(path, columns)


def read_x0_csv(path: Union[str, Path], assets: Optional[Sequence[str]] = None) -> Tuple[np.ndarray, List[str]]:
    """
    Read a target vector, reordered to match ``assets`` when given.

    Returns:
        (x0, asset labels)
    """
    path = Path(path)
    frame = read_table(path, ["asset", "x0"])
    values = numeric_column(frame, "x0", path)
    labels = frame["asset"].tolist()
    if len(set(labels)) != len(labels):
        raise FormatError(str(path), "duplicate asset label")
    if assets is None:
        return values, labels
    if set(labels) != set(assets):
        raise FormatError(str(path), f"assets {sorted(set(labels) ^ set(assets))} are not in both files")
    lookup = dict(zip(labels, values))
    return np.array([lookup[a] for a in assets]), list(assets)


def write_x0_csv(path: Union[str, Path], x0: np.ndarray, assets: Optional[Sequence[str]] = None) -> Path:
    assets = list(assets) if assets is not None else default_labels(len(x0))
    return write_table(path, {"asset": assets, "x0": np.asarray(x0, dtype=float)})
