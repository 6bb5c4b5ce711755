"""JSON emission with floats pinned to 17 significant digits.

The standard library writes shortest round-trip reprs, which are lossless
but not byte-stable across writers.  Persistent documents (datasets, plane
and session snapshots, CSV cells) instead format every float with ``%.17g``:
still lossless for IEEE doubles, and a fixed convention.
"""

from __future__ import annotations

import json
import math

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def dumps(obj, indent: int | None = None) -> str:
    """Serialize ``obj`` to JSON text with 17-significant-digit floats."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out)


def loads(text: str):
    return json.loads(text)


def _emit(obj, out: list[str], indent: int | None, depth: int) -> None:
    nl = "" if indent is None else "\n" + " " * (indent * (depth + 1))
    close_nl = "" if indent is None else "\n" + " " * (indent * depth)
    sep = "," if indent is None else ","
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if k:
                out.append(sep)
            out.append(nl)
            out.append(json.dumps(key))
            out.append(": " if indent is not None else ":")
            _emit(value, out, indent, depth + 1)
        out.append(close_nl)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for k, value in enumerate(items):
            if k:
                out.append(sep)
            out.append(nl)
            _emit(value, out, indent, depth + 1)
        out.append(close_nl)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")
