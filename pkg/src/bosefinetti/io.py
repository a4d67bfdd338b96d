"""JSON serialization of operators.

Schema: ``{"dim", "factors", "local_dim", "entries"}`` with ``entries`` a flat
row-major list of ``[re, im]`` pairs. Symmetric-subspace operators add
``{"n", "d", "basis": "occupation"}`` and set ``dim`` to the subspace dimension.
Python's float repr is the shortest string that round-trips, so
``operator_from_dict(operator_to_dict(a))`` reproduces ``a`` bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import MismatchError
from .occupation import sym_dim


def _entries(a: np.ndarray) -> list[list[float]]:
    flat = np.asarray(a, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def operator_to_dict(a: np.ndarray, local_dim: int, factors: int) -> dict:
    dim = local_dim**factors
    if a.shape != (dim, dim):
        raise MismatchError(f"shape {a.shape} does not match {local_dim}^{factors}")
    return {"dim": dim, "factors": factors, "local_dim": local_dim, "entries": _entries(a)}


def sym_operator_to_dict(a: np.ndarray, n: int, d: int) -> dict:
    dim = sym_dim(n, d)
    if a.shape != (dim, dim):
        raise MismatchError(f"shape {a.shape} does not match sym_dim({n}, {d}) = {dim}")
    return {
        "dim": dim,
        "factors": n,
        "local_dim": d + 1,
        "n": n,
        "d": d,
        "basis": "occupation",
        "entries": _entries(a),
    }


def operator_from_dict(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.shape != (dim * dim, 2):
        raise MismatchError(f"expected {dim * dim} [re, im] pairs, got shape {entries.shape}")
    if "basis" not in obj and dim != obj["local_dim"] ** obj["factors"]:
        raise MismatchError("dim != local_dim ** factors")
    out = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    return out


def matrix_from_json_value(value) -> np.ndarray:
    """Matrix from a nested real list or ``{"re": ..., "im": ...}``."""
    if isinstance(value, dict):
        re = np.asarray(value["re"], dtype=float)
        im = np.asarray(value.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise MismatchError("re and im parts differ in shape")
        return re + 1j * im if np.any(im) else re
    return np.asarray(value, dtype=float)


def matrix_to_json_value(a: np.ndarray):
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.any(a.imag):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return np.real(a).tolist()
