"""JSON system files.

One-dimensional systems::

    {"poles": [0, "3/2"], "weights": [1, "0.5"]}

Arrangements::

    {"n": 2, "hyperplanes": [{"u0": 0, "u": [1, 0], "lambda": 1}, ...]}

Numbers may be JSON numbers or strings holding exact decimals or fractions.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .arrangement import Arrangement, Hyperplane
from .oned import OneDSystem
from .scalar import parse_rational

_NUMBER = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}

ONED_SCHEMA = {
    "type": "object",
    "properties": {
        "poles": {"type": "array", "items": _NUMBER},
        "weights": {"type": "array", "items": _NUMBER},
    },
    "required": ["poles", "weights"],
    "additionalProperties": False,
}

ARRANGEMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "hyperplanes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "u0": _NUMBER,
                    "u": {"type": "array", "minItems": 1, "items": _NUMBER},
                    "lambda": _NUMBER,
                },
                "required": ["u0", "u", "lambda"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["n", "hyperplanes"],
    "additionalProperties": False,
}


class SystemFileError(ValueError):
    """Input rejected; the message names the offending field."""


def _field(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _validate(data, schema) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        raise SystemFileError(f"{_field(e.path)}: {e.message}")


def _num(value, where: str):
    try:
        return parse_rational(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise SystemFileError(f"{where}: not a number ({exc})") from None


def oned_from_data(data) -> OneDSystem:
    _validate(data, ONED_SCHEMA)
    poles = [_num(v, f"poles[{i}]") for i, v in enumerate(data["poles"])]
    weights = [_num(v, f"weights[{i}]") for i, v in enumerate(data["weights"])]
    if len(poles) != len(weights):
        raise SystemFileError(f"weights: expected {len(poles)} entries (one per pole), got {len(weights)}")
    for i, lam in enumerate(weights):
        if lam <= 0:
            raise SystemFileError(f"weights[{i}]: weight must be positive, got {lam}")
    seen = {}
    for i, a in enumerate(poles):
        if a in seen:
            raise SystemFileError(f"poles[{i}]: duplicate of poles[{seen[a]}] ({a})")
        seen[a] = i
    order = sorted(range(len(poles)), key=lambda i: poles[i])
    return OneDSystem(tuple(poles[i] for i in order), tuple(weights[i] for i in order))


def arrangement_from_data(data) -> Arrangement:
    _validate(data, ARRANGEMENT_SCHEMA)
    n = data["n"]
    hs = []
    for i, row in enumerate(data["hyperplanes"]):
        where = f"hyperplanes[{i}]"
        u = [_num(v, f"{where}.u[{j}]") for j, v in enumerate(row["u"])]
        if len(u) != n:
            raise SystemFileError(f"{where}.u: expected {n} components, got {len(u)}")
        if all(c == 0 for c in u):
            raise SystemFileError(f"{where}.u: normal must be nonzero")
        lam = _num(row["lambda"], f"{where}.lambda")
        if lam <= 0:
            raise SystemFileError(f"{where}.lambda: weight must be positive, got {lam}")
        hs.append(Hyperplane(_num(row["u0"], f"{where}.u0"), tuple(u), lam))
    return Arrangement(tuple(hs))


def load(path) -> OneDSystem | Arrangement:
    """Read a system file, deciding its kind from the keys present."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SystemFileError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if isinstance(data, dict) and "hyperplanes" in data:
        return arrangement_from_data(data)
    if isinstance(data, dict) and ("poles" in data or "weights" in data):
        return oned_from_data(data)
    raise SystemFileError("<root>: expected a 1-D system (poles, weights) or an arrangement (n, hyperplanes)")
