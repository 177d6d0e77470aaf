from __future__ import annotations

import math


def format_float(value: float, precision: int) -> str:
    """Shortest decimal form of ``value`` with at most ``precision`` significant digits.

    Uses ``format`` rather than ``str`` so the output never depends on locale.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = format(value, f".{precision}g")
    if text in ("-0", "-0.0"):
        return "0"
    return text


def format_complex(value: complex, precision: int) -> str:
    real = format_float(value.real, precision)
    imag = format_float(abs(value.imag), precision)
    sign = "-" if math.copysign(1.0, value.imag) < 0 and imag != "0" else "+"
    return f"{real}{sign}{imag}j"


def format_bool(value: bool) -> str:
    return "true" if value else "false"
