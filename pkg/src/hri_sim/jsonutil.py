"""Canonical JSON rendering: key-sorted, single-line, floats at 3 decimals."""

from __future__ import annotations

import json


def canonical(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.3f}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(canonical(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(
            f"{json.dumps(k, ensure_ascii=False)}:{canonical(value[k])}"
            for k in sorted(value)
        ) + "}"
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


def round3(x: float) -> float:
    """Quantize to the grid canonical() renders, so round trips are exact."""
    return round(float(x), 3)
