"""Quantity strings with unit suffixes, e.g. ``"124.3 ps"`` or ``"3.2 Gb/s"``.

Values are scaled through :class:`decimal.Decimal` so that ``"124.3 ps"``
converts to exactly the same float as the literal ``124.3e-12``.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation

_PREFIX = {
    "": 0, "f": -15, "p": -12, "n": -9, "u": -6, "µ": -6, "μ": -6,
    "m": -3, "k": 3, "K": 3, "M": 6, "G": 9, "T": 12,
}

# base unit -> dimension
_BASE = {
    "s": "time",
    "V": "voltage",
    "W": "power",
    "ohm": "resistance",
    "Ω": "resistance",
    "b": "bits",
    "bit": "bits",
    "bits": "bits",
    "b/s": "rate",
    "bps": "rate",
    "lambda2": "area",
    "λ²": "area",
    "λ2": "area",
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def _split_unit(unit: str) -> tuple[int, str]:
    if unit in _BASE:
        return 0, unit
    for base in sorted(_BASE, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in _PREFIX:
                return _PREFIX[prefix], base
    raise ValueError(f"unknown unit {unit!r}")


def parse_quantity(text: str | int | float, dimension: str | None = None) -> float:
    """Parse ``"<number> <unit>"`` into SI base units.

    A bare number (or a non-string) is returned unchanged. When *dimension*
    is given, a unit of a different dimension raises ``ValueError``.
    """
    if isinstance(text, bool):
        raise ValueError(f"expected a quantity, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    m = _QTY.match(text)
    if not m:
        raise ValueError(f"malformed quantity {text!r}")
    number, unit = m.groups()
    try:
        value = Decimal(number)
    except InvalidOperation as exc:  # pragma: no cover - regex guards this
        raise ValueError(f"malformed number in {text!r}") from exc
    if not unit:
        return float(value)
    exp, base = _split_unit(unit)
    if dimension is not None and _BASE[base] != dimension:
        raise ValueError(f"{text!r} is a {_BASE[base]}, expected {dimension}")
    return float(value.scaleb(exp))


def format_time(seconds: float) -> str:
    for unit, scale in (("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("ps", 1e-12)):
        if abs(seconds) >= scale:
            return f"{seconds / scale:.4g} {unit}"
    return f"{seconds:.4g} s"
