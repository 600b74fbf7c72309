# utils/estimation/records_io.py
"""
Transaction-record directories and coefficient files

A records directory holds ``manifest.csv`` and one CSV per record.

manifest.csv:  record,file,dvol_f_1..dvol_f_K,sigma_f_1..sigma_f_K
record file:   asset,v_tilde,r_bar,dvol_hat,sigma_hat,w_1..w_K,cov_1..cov_N
               (row i of the cov_* block is row i of the noise covariance)

Coefficients and fit diagnostics are key = value files.
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from ..errors import CrossImpactError, FormatError
from ..kv_format import parse_float, parse_vector, read_kv, write_kv
from ..table_io import numeric_column, read_table, write_table
from .mle import MLEResult
from .records import ImpactCoefficients, TransactionRecord

MANIFEST = "manifest.csv"
RECORD_COLUMNS = ("asset", "v_tilde", "r_bar", "dvol_hat", "sigma_hat")


def write_records(directory: Union[str, Path], records: List[TransactionRecord]) -> Path:
    """Write every record plus the manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not records:
        raise FormatError(str(directory), "no records to write")
    K = records[0].n_funds
    manifest = {"record": [], "file": []}
    for k in range(1, K + 1):
        manifest[f"dvol_f_{k}"] = []
    for k in range(1, K + 1):
        manifest[f"sigma_f_{k}"] = []

    width = max(5, len(str(len(records))))
    for index, rec in enumerate(records, start=1):
        if rec.n_funds != K:
            raise FormatError(str(directory), f"record {index} has {rec.n_funds} funds, expected {K}")
        name = f"record_{index:0{width}d}.csv"
        columns = {
            "asset": [f"asset_{i + 1}" for i in range(rec.n_assets)],
            "v_tilde": rec.v_tilde,
            "r_bar": rec.r_bar,
            "dvol_hat": rec.dvol_hat,
            "sigma_hat": rec.sigma_hat,
        }
        for k in range(K):
            columns[f"w_{k + 1}"] = rec.W_tilde[:, k]
        for j in range(rec.n_assets):
            columns[f"cov_{j + 1}"] = rec.sigma_noise[:, j]
        write_table(directory / name, columns)

        manifest["record"].append(index)
        manifest["file"].append(name)
        for k in range(K):
            manifest[f"dvol_f_{k + 1}"].append(rec.dvol_f_hat[k])
            manifest[f"sigma_f_{k + 1}"].append(rec.sigma_f_hat[k])
    return write_table(directory / MANIFEST, manifest)


def read_records(directory: Union[str, Path]) -> List[TransactionRecord]:
    directory = Path(directory)
    manifest_path = directory / MANIFEST
    manifest = read_table(manifest_path, ["record", "file"])
    K = sum(1 for c in manifest.columns if c.startswith("dvol_f_"))
    fund_columns = [f"dvol_f_{k}" for k in range(1, K + 1)] + [f"sigma_f_{k}" for k in range(1, K + 1)]
    absent = [c for c in fund_columns if c not in manifest.columns]
    if absent:
        raise FormatError(str(manifest_path), f"missing column(s) {absent}")
    fund_values = {c: numeric_column(manifest, c, manifest_path) for c in fund_columns}

    records = []
    for row, name in enumerate(manifest["file"]):
        path = directory / name
        frame = read_table(path, RECORD_COLUMNS)
        n = len(frame)
        w_cols = [f"w_{k}" for k in range(1, K + 1)]
        cov_cols = [f"cov_{j}" for j in range(1, n + 1)]
        absent = [c for c in w_cols + cov_cols if c not in frame.columns]
        if absent:
            raise FormatError(str(path), f"missing column(s) {absent}")
        W = np.column_stack([numeric_column(frame, c, path) for c in w_cols]) if K else np.zeros((n, 0))
        try:
            records.append(TransactionRecord(
                v_tilde=numeric_column(frame, "v_tilde", path),
                r_bar=numeric_column(frame, "r_bar", path),
                W_tilde=W,
                dvol_hat=numeric_column(frame, "dvol_hat", path),
                sigma_hat=numeric_column(frame, "sigma_hat", path),
                dvol_f_hat=np.array([fund_values[f"dvol_f_{k}"][row] for k in range(1, K + 1)]),
                sigma_f_hat=np.array([fund_values[f"sigma_f_{k}"][row] for k in range(1, K + 1)]),
                sigma_noise=np.column_stack([numeric_column(frame, c, path) for c in cov_cols]),
            ))
        except CrossImpactError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(str(path), str(exc)) from None
    if not records:
        raise FormatError(str(manifest_path), "manifest lists no records")
    return records


def write_coefficients(path: Union[str, Path], coef: ImpactCoefficients) -> Path:
    return write_kv(path, {"gamma_id": coef.gamma_id, "gamma_f": coef.gamma_f},
                    header="reduced-form impact coefficients")


def read_coefficients(path: Union[str, Path]) -> ImpactCoefficients:
    values = read_kv(path)
    try:
        return ImpactCoefficients(parse_float(values, "gamma_id", path), parse_vector(values, "gamma_f", path))
    except CrossImpactError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(path), str(exc)) from None


def write_diagnostics(path: Union[str, Path], result: MLEResult) -> Path:
    return write_kv(path, {
        "converged": result.converged,
        "iterations": result.iterations,
        "function_evaluations": result.function_evaluations,
        "gradient_norm": result.gradient_norm,
        "log_likelihood": result.log_likelihood,
        "n_records": result.n_records,
        "shared_fund_coefficient": result.shared_fund_coefficient,
        "message": result.message.replace("\n", " "),
    }, header="maximum-likelihood fit diagnostics")
