"""Canonical JSON writing.

All reals are written as decimal with 17 significant digits, which
round-trips IEEE doubles losslessly.  Key order is insertion order of the
dicts handed in, so serialization is byte-deterministic; the same text is
what content hashes are computed over.
"""

from __future__ import annotations

import hashlib
import json


def format_real(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("non-finite real in serialization")
    s = f"{x:.17g}"
    # keep a uniform integer rendering ("2" not "2.0000000000000000")
    return s


def canonical_dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            if not isinstance(k, str):
                raise TypeError("canonical JSON keys must be strings")
            items.append(f'{pad}  {json.dumps(k)}: {canonical_dumps(v, indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
        if flat:
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [f"{pad}  {canonical_dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_real(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"unsupported JSON scalar {type(v)!r}")


def canonical_loads(text: str):
    return json.loads(text)


def content_hash(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
