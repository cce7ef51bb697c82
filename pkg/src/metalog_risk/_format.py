"""Deterministic JSON output with fixed float formatting.

The standard json module prints floats with repr(), whose digit count varies
by value.  Command-line output and saved coefficient files instead format
every real with 17 significant digits, which is enough to round-trip any
double bit-exactly and keeps output byte-for-byte reproducible.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["format_real", "dumps"]


def format_real(x: float) -> str:
    """17-significant-digit decimal form of a finite float."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return f"{x:.17g}"


def _write(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    closing_pad = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_real(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(f"{pad}{json.dumps(key)}: ")
            _write(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(closing_pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(seq):
            out.append(pad)
            _write(value, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(closing_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps(obj, indent: int = 2) -> str:
    """Serialize dicts/lists/scalars to JSON text, reals in 17g format.

    Key order is preserved as given, so callers control the layout and the
    output is deterministic.
    """
    out: list[str] = []
    _write(obj, out, indent, 0)
    return "".join(out)
