# utils/orderflow/params_io.py
"""
Order-flow parameter files (key = value)

    lambda  = 200
    cv      = 0.5
    qbar_id = 1, 1, 1
    qbar_f  = 1
    w_tilde = 1, 1, 1
    alpha   = 0.5, 0.5
    beta    = 0.25, 0.75
"""

from pathlib import Path
from typing import Union

from ..errors import DimensionMismatchError, FormatError, InvalidModelError
from ..kv_format import parse_float, parse_vector, read_kv, write_kv
from .params import OrderFlowParams

PARAM_KEYS = ("lambda", "cv", "qbar_id", "qbar_f", "w_tilde", "alpha", "beta")


def write_params(path: Union[str, Path], params: OrderFlowParams) -> Path:
    return write_kv(path, {
        "lambda": params.lam,
        "cv": params.cv,
        "qbar_id": params.qbar_id,
        "qbar_f": params.qbar_f,
        "w_tilde": params.w_tilde,
        "alpha": params.alpha,
        "beta": params.beta,
    }, header="compound-Poisson order-flow parameters")


def read_params(path: Union[str, Path]) -> OrderFlowParams:
    values = read_kv(path)
    unknown = sorted(set(values) - set(PARAM_KEYS))
    if unknown:
        raise FormatError(str(path), f"unknown key(s) {unknown}")
    try:
        return OrderFlowParams(
            lam=parse_float(values, "lambda", path),
            cv=parse_float(values, "cv", path),
            qbar_id=parse_vector(values, "qbar_id", path),
            qbar_f=parse_float(values, "qbar_f", path),
            w_tilde=parse_vector(values, "w_tilde", path),
            alpha=parse_vector(values, "alpha", path),
            beta=parse_vector(values, "beta", path),
        )
    except (DimensionMismatchError, InvalidModelError) as exc:
        raise FormatError(str(path), str(exc)) from None
