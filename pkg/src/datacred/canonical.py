"""Deterministic byte-exact JSON serialization.

Signatures in this toolkit are computed over canonical bytes, so two
independent serializations of the same document must agree bit for bit:

- object members sorted by code-point comparison of their keys
- no insignificant whitespace
- UTF-8 output, minimal string escaping (only ``"``, ``\\`` and controls)
- integers rendered without exponent or fraction
- non-integer and non-finite numbers rejected outright

Signed documents in this system only ever contain strings, integers,
booleans, nulls, arrays and objects, which is what makes the number
restriction safe to impose.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import (
    CanonicalizationError,
    IntegerOutOfRange,
    NonFiniteNumber,
    NonIntegerNumber,
)

# Largest integer exactly representable by every IEEE-754 double parser.
MAX_SAFE_INTEGER = 2**53


def _validate(value: Any, path: str) -> Any:
    """Check value is canonicalizable; return it with floats demoted to ints."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        if abs(value) > MAX_SAFE_INTEGER:
            raise IntegerOutOfRange(f"{path}: integer magnitude exceeds 2**53")
        return value
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise NonFiniteNumber(f"{path}: non-finite number")
        if not value.is_integer():
            raise NonIntegerNumber(f"{path}: non-integer number {value!r}")
        as_int = int(value)
        if abs(as_int) > MAX_SAFE_INTEGER:
            raise IntegerOutOfRange(f"{path}: integer magnitude exceeds 2**53")
        return as_int
    if isinstance(value, (list, tuple)):
        return [_validate(item, f"{path}[{i}]") for i, item in enumerate(value)]
    if isinstance(value, dict):
        out = {}
        for key, item in value.items():
            if not isinstance(key, str):
                raise CanonicalizationError(f"{path}: object key {key!r} is not a string")
            out[key] = _validate(item, f"{path}.{key}")
        return out
    raise CanonicalizationError(f"{path}: unsupported type {type(value).__name__}")


def canonicalize(value: Any) -> bytes:
    """Serialize a JSON value to its unique canonical byte sequence."""
    cleaned = _validate(value, "$")
    # sort_keys on Python strings compares code points, matching the canonical
    # ordering rule; ensure_ascii=False keeps escaping minimal.
    text = json.dumps(
        cleaned,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )
    return text.encode("utf-8")


def parse(data: bytes | str) -> Any:
    """Parse JSON bytes produced by (or destined for) canonicalize."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)
