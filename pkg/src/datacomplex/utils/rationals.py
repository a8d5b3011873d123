import math
from fractions import Fraction
from typing import Union

RationalLike = Union[int, str, Fraction, float]


def parse_rational(value: RationalLike) -> Fraction:
    """
    Exact rational from "p/q", a decimal string ("0.25" -> 1/4) or an int.
    Floats are converted through their shortest repr, so JSON 0.1 becomes 1/10.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational: {value!r}") from e
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Union[Fraction, int, float]) -> str:
    """Exact p/q rendering; +inf renders as "inf"."""
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return "inf"
        value = Fraction(repr(value))
    return str(Fraction(value))


def format_decimal(value: Union[Fraction, int, float], digits: int = 6) -> str:
    """Lossy decimal rendering, only for human-facing companions of exact values."""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return f"{float(value):.{digits}f}"
