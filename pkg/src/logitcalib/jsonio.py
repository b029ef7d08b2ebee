"""Deterministic JSON and float formatting helpers.

Every artifact this package writes (datasets, models, reports) must be
byte-identical across reruns on the same inputs. Floats are therefore
rendered with 17 significant digits, which round-trips any IEEE-754
double exactly, and object keys are emitted in sorted order.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any

import numpy as np

from .errors import DataError


def format_float(x: float) -> str:
    """Render a float with 17 significant digits, round-trip exact."""
    x = float(x)
    if not math.isfinite(x):
        raise DataError(f"cannot serialize non-finite float {x!r}")
    s = format(x, ".17g")
    # a bare integer rendering would parse back as int, losing the type
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def format_float9(x: float) -> str:
    """Render a probability with 9 fixed decimal digits."""
    x = float(x)
    if not math.isfinite(x):
        raise DataError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".9f")


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, float):
        # np.float64 subclasses float, so this covers both
        out.append(format_float(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, np.floating):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise DataError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(", ")
            out.append(json.dumps(key))
            out.append(": ")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise DataError(f"cannot serialize object of type {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, exact floats, stable spacing."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def dump(obj: Any, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path: str | os.PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
