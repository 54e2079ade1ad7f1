"""Deterministic JSON and float formatting for all emitted files.

Floats are printed with 12 significant digits so that outputs are
byte-identical across runs and easy to diff. Non-finite floats are
rejected: output files must contain finite numbers only.
"""

import math

import numpy as np

from .errors import NumericalError


def format_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x!r} in output")
    s = "%.12g" % x
    return "0" if s == "-0" else s


def dumps_json(obj) -> str:
    """Serialize dicts/lists/strings/numbers with 12-sig-digit floats.

    Insertion order of dict keys is preserved, so a fixed construction
    order yields byte-identical documents.
    """
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")


def _write(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, np.ndarray):
        _write(obj.tolist(), out)
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {k!r}")
            out.append(_escape(k))
            out.append(":")
            _write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _write(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append("\\u%04x" % ord(ch))
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)
