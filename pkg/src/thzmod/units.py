"""Parsing of unit-suffixed quantities such as ``"800 nm"`` or ``"2500 fs^2"``."""
from __future__ import annotations

import re

_UNITS = {
    "time": {"as": 1e-18, "fs": 1e-15, "ps": 1e-12, "ns": 1e-9, "us": 1e-6, "s": 1.0},
    "length": {"pm": 1e-12, "nm": 1e-9, "um": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "gdd": {"fs^2": 1e-30, "ps^2": 1e-24, "s^2": 1.0},
    "walkoff": {"fs/mm": 1e-12, "ps/mm": 1e-9, "s/m": 1.0},
    "nonlinearity": {"pm/V": 1e-12, "m/V": 1.0},
}

_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z^/0-9]+)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(value, kind: str) -> float:
    """Convert ``"<number> <unit>"`` to SI; bare numbers are rejected."""
    units = _UNITS[kind]
    if isinstance(value, bool) or not isinstance(value, str):
        raise UnitError(f"expected a {kind} with a unit suffix ({', '.join(units)}), got {value!r}")
    m = _PATTERN.match(value)
    if not m:
        raise UnitError(f"cannot parse {value!r} as a {kind}")
    number, unit = m.groups()
    if unit not in units:
        raise UnitError(f"unknown {kind} unit {unit!r} (allowed: {', '.join(units)})")
    return float(number) * units[unit]


def format_quantity(value: float, unit: str, kind: str) -> str:
    return f"{value / _UNITS[kind][unit]:.12g} {unit}"
