"""Engineering-unit conversion at the I/O boundary.

Everything inside the package is strict SI: Hz, W, m, Np/m, s^2/m, s^3/m,
1/(W*m), 1/(W*m*Hz).  Engineering units exist only in scenario files and
report headers, and go through ``convert_units`` / ``to_engineering``.
"""

from __future__ import annotations

import math

from .errors import UnitError

_LN10 = math.log(10.0)

#: Supported engineering-unit tags and their SI target units.
UNIT_TAGS = {
    "dB/km": "Np/m",
    "ps^2/km": "s^2/m",
    "ps^3/km": "s^3/m",
    "dBm": "W",
    "THz": "Hz",
    "1/(W*km)": "1/(W*m)",
}

# Linear tags convert by a pure scale factor.
_SCALE = {
    "dB/km": _LN10 / 10.0 / 1e3,   # dB -> Np, km -> m
    "ps^2/km": 1e-24 / 1e3,
    "ps^3/km": 1e-36 / 1e3,
    "THz": 1e12,
    "1/(W*km)": 1e-3,
}


def convert_units(value: float, unit: str) -> float:
    """Convert an engineering value with a unit tag to its SI equivalent.

    Parameters
    ----------
    value:
        Numeric value expressed in the engineering unit ``unit``.
    unit:
        One of the tags in ``UNIT_TAGS``.

    Raises
    ------
    UnitError
        If the tag is not supported.
    """
    if unit in _SCALE:
        return value * _SCALE[unit]
    if unit == "dBm":
        return 1e-3 * 10.0 ** (value / 10.0)
    raise UnitError(f"unknown unit tag {unit!r}; supported: {sorted(UNIT_TAGS)}")


def to_engineering(value: float, unit: str) -> float:
    """Inverse of :func:`convert_units`: SI value back to the tagged unit."""
    if unit in _SCALE:
        return value / _SCALE[unit]
    if unit == "dBm":
        if value <= 0.0:
            raise UnitError("dBm conversion requires a positive power in W")
        return 10.0 * math.log10(value / 1e-3)
    raise UnitError(f"unknown unit tag {unit!r}; supported: {sorted(UNIT_TAGS)}")


def db_to_linear(value_db: float) -> float:
    """Plain dB ratio to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Linear ratio to dB."""
    if value <= 0.0:
        raise UnitError("dB conversion requires a positive ratio")
    return 10.0 * math.log10(value)
