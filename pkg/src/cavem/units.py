"""Unit-suffixed quantity parsing and angular/cyclic frequency conversion.

All internal frequencies and rates in this package are angular (rad/s);
human-facing files, CLI arguments and reports use cyclic values (Hz, i.e.
omega/2pi) with SI unit suffixes.  Conversion happens only here, at the
I/O boundary.
"""

from __future__ import annotations

import math
import re

TWO_PI = 2.0 * math.pi

# SI prefixes accepted in front of a base unit.
_PREFIXES = {
    "y": 1e-24, "z": 1e-21, "a": 1e-18, "f": 1e-15, "p": 1e-12,
    "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "": 1.0,
    "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12, "P": 1e15,
}

# Base units mapped to (scale to SI, canonical dimension label).
# "g" is grams so that "kg" parses through the prefix table.
_BASE_UNITS = {
    "Ohm": (1.0, "Ohm"), "ohm": (1.0, "Ohm"), "Ω": (1.0, "Ohm"),
    "eV": (1.602176634e-19, "J"),
    "Pa": (1.0, "Pa"),
    "Hz": (1.0, "Hz"),
    "V": (1.0, "V"), "A": (1.0, "A"), "K": (1.0, "K"), "s": (1.0, "s"),
    "m": (1.0, "m"), "F": (1.0, "F"), "H": (1.0, "H"), "T": (1.0, "T"),
    "W": (1.0, "W"), "J": (1.0, "J"), "C": (1.0, "C"), "g": (1e-3, "kg"),
    "%": (0.01, ""),
}

# Longest suffix first so that "Pa" wins over prefix "P" + unit "a", etc.
_UNITS_BY_LENGTH = sorted(_BASE_UNITS, key=len, reverse=True)

_NUMBER_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$")


class UnitError(ValueError):
    """A quantity string could not be parsed or has the wrong dimension."""


def _parse_term(term: str) -> tuple[float, str]:
    """Parse a single prefixed unit with optional integer power, e.g. 'kHz', 'T^2'."""
    power = 1
    if "^" in term:
        term, _, exp = term.partition("^")
        try:
            power = int(exp)
        except ValueError as err:
            raise UnitError(f"bad unit exponent in {term!r}^{exp!r}") from err
    for unit in _UNITS_BY_LENGTH:
        if term.endswith(unit):
            prefix = term[: -len(unit)]
            if prefix in _PREFIXES:
                scale, dim = _BASE_UNITS[unit]
                label = dim if power == 1 else f"{dim}^{power}"
                return (_PREFIXES[prefix] * scale) ** power, label
    raise UnitError(f"unknown unit {term!r}")


def parse_quantity(text: str, expect: str | None = None) -> float:
    """Parse a number with an optional SI-suffixed unit into an SI value.

    Examples: '520 kHz' -> 520e3, '-0.36 V' -> -0.36, '45.4 kHz/V' -> 45.4e3,
    '7.5e12 Hz/T^2' -> 7.5e12, '1.5 eV' -> 2.4e-19 (joules).

    If `expect` is given (a canonical dimension label such as 'Hz', 'Hz/V',
    'm', 's'), a mismatching unit raises UnitError.
    """
    m = _NUMBER_RE.match(text)
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    unit_str = m.group(2)
    if not unit_str:
        dim = ""
    else:
        parts = unit_str.split("/")
        scale, dim = _parse_term(parts[0])
        value *= scale
        for denom in parts[1:]:
            dscale, ddim = _parse_term(denom)
            value /= dscale
            dim += "/" + ddim
    if expect is not None and dim != expect:
        raise UnitError(f"expected a quantity in {expect!r}, got {text!r} ({dim or 'dimensionless'})")
    return value


_DISPLAY_PREFIXES = [
    (-24, "y"), (-21, "z"), (-18, "a"), (-15, "f"), (-12, "p"), (-9, "n"),
    (-6, "u"), (-3, "m"), (0, ""), (3, "k"), (6, "M"), (9, "G"), (12, "T"),
    (15, "P"),
]


def format_si(value: float, unit: str, digits: int = 4) -> str:
    """Engineering-prefixed display string, e.g. format_si(5.087e9, 'Hz') -> '5.087 GHz'."""
    if value == 0 or not math.isfinite(value):
        return f"{value:g} {unit}".strip()
    exponent = int(math.floor(math.log10(abs(value)) / 3.0)) * 3
    exponent = min(max(exponent, _DISPLAY_PREFIXES[0][0]), _DISPLAY_PREFIXES[-1][0])
    prefix = dict(_DISPLAY_PREFIXES)[exponent]
    return f"{value / 10.0 ** exponent:.{digits}g} {prefix}{unit}".strip()


def angular(f_cyclic: float) -> float:
    """Cyclic frequency or rate (Hz) to angular (rad/s)."""
    return TWO_PI * f_cyclic


def cyclic(omega: float) -> float:
    """Angular frequency or rate (rad/s) to cyclic (Hz)."""
    return omega / TWO_PI
