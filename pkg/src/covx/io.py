"""JSON file formats.

Matrix:          {"rows": n, "cols": m, "data": [[re, im], ...]}   (row-major)
Channel:         a matrix object plus {"dim_in": h, "dim_out": k}
Representation:  {"type": "u1_weights", "weights": [...]}
                 {"type": "finite", "unitaries": [matrix, ...]}
                 {"type": "su_d_tensor", "d": n, "variant": "u_ustar" | "ustar_ustar"}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError

# reports that embed a matrix under one of these keys can be fed back as inputs
_EMBEDDED_KEYS = ("matrix", "maximizer", "witness", "R", "xi")


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {M.shape}")
    flat = M.reshape(-1)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    if "rows" not in obj:
        for key in _EMBEDDED_KEYS:
            if isinstance(obj.get(key), dict):
                return matrix_from_json(obj[key], f"{where}.{key}")
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise ParseError(f"{where}: missing field {exc.args[0]!r}") from None
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise ParseError(f"{where}: rows/cols must be non-negative integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise ParseError(f"{where}: expected {rows * cols} entries, got {got}")
    out = np.empty(rows * cols, dtype=complex)
    for i, entry in enumerate(data):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            out[i] = float(entry)
            continue
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise ParseError(f"{where}.data[{i}] (row {i // max(cols, 1)}, col {i % max(cols, 1)}): "
                             f"expected [re, im], got {entry!r}")
        out[i] = complex(entry[0], entry[1])
    return out.reshape(rows, cols)


def read_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(read_json(path), str(path))


def save_matrix(path, M) -> None:
    write_json(path, matrix_to_json(M))


def channel_to_json(R, dim_in: int, dim_out: int) -> dict:
    obj = matrix_to_json(R)
    obj.update(dim_in=int(dim_in), dim_out=int(dim_out))
    return obj


def channel_from_json(obj, where: str = "channel"):
    """Return (R, dim_in, dim_out)."""
    R = matrix_from_json(obj, where)
    src = obj if "dim_in" in obj else next(
        (obj[k] for k in _EMBEDDED_KEYS if isinstance(obj.get(k), dict) and "dim_in" in obj[k]), obj)
    try:
        dim_in, dim_out = int(src["dim_in"]), int(src["dim_out"])
    except (KeyError, TypeError, ValueError):
        raise ParseError(f"{where}: channel files need integer 'dim_in' and 'dim_out'") from None
    if R.shape != (dim_in * dim_out, dim_in * dim_out):
        raise ParseError(f"{where}: matrix shape {R.shape} does not match dim_out*dim_in = {dim_in * dim_out}")
    return R, dim_in, dim_out


def load_channel(path):
    return channel_from_json(read_json(path), str(path))


def rep_to_json(rep) -> dict:
    from .reps import FiniteGroup, SUdTensor, U1Weights

    if isinstance(rep, U1Weights):
        return {"type": "u1_weights", "weights": [int(w) for w in rep.weights]}
    if isinstance(rep, FiniteGroup):
        return {"type": "finite", "unitaries": [matrix_to_json(U) for U in rep.unitaries]}
    if isinstance(rep, SUdTensor):
        return {"type": "su_d_tensor", "d": rep.d, "variant": rep.variant}
    raise TypeError(f"cannot serialize {type(rep).__name__}")


def rep_from_json(obj, where: str = "representation", validate: bool = True):
    from .reps import FiniteGroup, SUdTensor, U1Weights

    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(f"{where}: expected an object with a 'type' field")
    kind = obj["type"]
    if kind == "u1_weights":
        w = obj.get("weights")
        if not isinstance(w, list) or not w or not all(isinstance(x, int) and not isinstance(x, bool) for x in w):
            raise ParseError(f"{where}: 'weights' must be a non-empty list of integers")
        return U1Weights(w)
    if kind == "finite":
        us = obj.get("unitaries")
        if not isinstance(us, list) or not us:
            raise ParseError(f"{where}: 'unitaries' must be a non-empty list of matrices")
        mats = [matrix_from_json(u, f"{where}.unitaries[{i}]") for i, u in enumerate(us)]
        return FiniteGroup(mats, validate=validate)
    if kind == "su_d_tensor":
        d, variant = obj.get("d"), obj.get("variant")
        if not isinstance(d, int) or d < 2:
            raise ParseError(f"{where}: 'd' must be an integer >= 2")
        if variant not in ("u_ustar", "ustar_ustar"):
            raise ParseError(f"{where}: 'variant' must be 'u_ustar' or 'ustar_ustar'")
        return SUdTensor(d, variant)
    raise ParseError(f"{where}: unknown representation type {kind!r}")


def load_rep(path, validate: bool = True):
    return rep_from_json(read_json(path), str(path), validate=validate)


def save_rep(path, rep) -> None:
    write_json(path, rep_to_json(rep))
