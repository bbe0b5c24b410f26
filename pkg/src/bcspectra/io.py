"""JSON model and boundary-condition files.

Model file::

    {"m": 2, "top_orders": [1, 1],
     "coeffs": {"0": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
                "1": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}}

Complex numbers are ``[re, im]`` pairs; orders missing from ``coeffs`` are zero.

Boundary-condition file, one of::

    {"type": "unitary", "u": [[[re, im], ...], ...]}
    {"type": "u1_angle", "nu": 1.5707963267948966}
    {"type": "raw", "c_plus": [[...]], "c_minus": [[...]]}

Raw relations C+ Psi+ = C- Psi- act on the stretched mover amplitudes and are
classified on load; only admissible ones become a boundary condition.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .boundary import (
    Admissible,
    BoundaryCondition,
    classify_relations,
    standard_bc,
    u1_bc_from_angle,
)
from .current import CurrentDiagonalization
from .errors import ConfigError, DomainError
from .hamiltonian import PolyMatrixHamiltonian, new_hamiltonian


def fmt_float(x: float) -> str:
    """Shortest repr that round-trips; 17 significant digits at most."""
    return repr(float(x))


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [encode_complex(z) for z in a]
    return [encode_matrix(row) for row in a]


def _decode_complex(v, path, field) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v), 0.0)
    if (
        isinstance(v, list)
        and len(v) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"expected a number or [re, im] pair, got {v!r}", path, field)


def decode_matrix(v, path=None, field=None) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigError("expected a nested list of [re, im] pairs", path, field)
    rows = [[_decode_complex(x, path, field) for x in row] for row in v]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError("ragged matrix", path, field)
    return np.array(rows, dtype=complex)


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", str(path)) from exc


def model_from_dict(data: Any, path: str | None = None) -> PolyMatrixHamiltonian:
    if not isinstance(data, dict):
        raise ConfigError("model must be a JSON object", path)
    for key in ("m", "top_orders", "coeffs"):
        if key not in data:
            raise ConfigError("missing field", path, key)
    m = data["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ConfigError("must be a positive integer", path, "m")
    orders = data["top_orders"]
    if (
        not isinstance(orders, list)
        or len(orders) != m
        or not all(isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in orders)
    ):
        raise ConfigError(f"must list {m} positive integers", path, "top_orders")
    raw = data["coeffs"]
    if not isinstance(raw, dict):
        raise ConfigError("must map momentum order to a matrix", path, "coeffs")
    coeffs = {}
    for key, value in raw.items():
        try:
            n = int(key)
        except ValueError:
            raise ConfigError(f"order {key!r} is not an integer", path, "coeffs") from None
        if n < 0 or n > max(orders):
            raise ConfigError(f"order {n} outside 0..{max(orders)}", path, f"coeffs.{key}")
        mat = decode_matrix(value, path, f"coeffs.{key}")
        if mat.shape != (m, m):
            raise ConfigError(f"shape {mat.shape} != ({m}, {m})", path, f"coeffs.{key}")
        coeffs[n] = mat
    return new_hamiltonian(m, orders, coeffs)


def model_to_dict(h: PolyMatrixHamiltonian) -> dict:
    return {
        "m": h.m,
        "top_orders": list(h.top_orders),
        "coeffs": {str(n): encode_matrix(c) for n, c in enumerate(h.coeffs) if np.any(c != 0)},
    }


def load_model(path) -> PolyMatrixHamiltonian:
    return model_from_dict(_read_json(path), str(path))


def save_model(h: PolyMatrixHamiltonian, path) -> None:
    Path(path).write_text(dumps(model_to_dict(h)) + "\n", encoding="utf-8")


def bc_from_dict(data: Any, diag: CurrentDiagonalization, path: str | None = None) -> BoundaryCondition:
    if not isinstance(data, dict) or "type" not in data:
        raise ConfigError("boundary condition must be an object with a 'type'", path, "type")
    kind = data["type"]
    try:
        if kind == "u1_angle":
            nu = data.get("nu")
            if not isinstance(nu, (int, float)) or isinstance(nu, bool) or not math.isfinite(nu):
                raise ConfigError("must be a finite number", path, "nu")
            return u1_bc_from_angle(diag, float(nu))
        if kind == "unitary":
            if "u" not in data:
                raise ConfigError("missing field", path, "u")
            return standard_bc(diag, decode_matrix(data["u"], path, "u"))
        if kind == "raw":
            for key in ("c_plus", "c_minus"):
                if key not in data:
                    raise ConfigError("missing field", path, key)
            c_plus = decode_matrix(data["c_plus"], path, "c_plus")
            c_minus = decode_matrix(data["c_minus"], path, "c_minus")
            verdict = classify_relations(diag, c_plus, c_minus)
            if not isinstance(verdict, Admissible):
                raise ConfigError(f"relations are {verdict.verdict}, not admissible", path, "type")
            return standard_bc(diag, verdict.u)
    except DomainError as exc:
        raise ConfigError(str(exc), path, "type") from exc
    raise ConfigError(f"unknown type {kind!r} (unitary, u1_angle, raw)", path, "type")


def load_bc(source: str, diag: CurrentDiagonalization) -> BoundaryCondition:
    """Load a BC from a file path or an inline JSON object."""
    text = source.strip()
    if text.startswith("{"):
        try:
            return bc_from_dict(json.loads(text), diag, "<inline>")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid inline JSON: {exc.msg}", "<inline>") from exc
    return bc_from_dict(_read_json(source), diag, source)


def bc_to_dict(bc: BoundaryCondition) -> dict:
    return {"type": "unitary", "u": encode_matrix(bc.u)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, complex as [re, im], non-finite as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)
