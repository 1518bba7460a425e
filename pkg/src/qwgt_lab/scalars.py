"""Scalar fields used by the evaluators: ``Fraction``, ``float`` and ``complex``.

Exact rationals never round. Floats and complexes follow IEEE double
arithmetic; the evaluators keep their error to a few ulps per term by
accumulating integer counts first and multiplying by scalars last.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from numbers import Number
from typing import Any, Union

from .errors import InputError

Scalar = Union[Fraction, float, complex]

_RATIONAL = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def parse_scalar(raw: Any, where: str = "scalar") -> Scalar:
    """Parse a scalar literal.

    Integers and ``"p/q"`` strings become ``Fraction``; decimal strings and JSON
    floats become ``float``; ``{"re": ..., "im": ...}`` becomes ``complex``.
    """
    if isinstance(raw, bool):
        raise InputError(f"{where}: booleans are not scalars")
    if isinstance(raw, dict):
        if set(raw) - {"re", "im"} or not raw:
            raise InputError(f"{where}: complex literal needs keys 're' and 'im', got {sorted(raw)}")
        re_ = _parse_real(raw.get("re", 0), f"{where}.re")
        im_ = _parse_real(raw.get("im", 0), f"{where}.im")
        return complex(float(re_), float(im_))
    return _parse_real(raw, where)


def _parse_real(raw: Any, where: str) -> Fraction | float:
    if isinstance(raw, bool):
        raise InputError(f"{where}: booleans are not scalars")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        s = raw.strip()
        if _RATIONAL.match(s):
            try:
                return Fraction(s.replace(" ", ""))
            except ZeroDivisionError as exc:
                raise InputError(f"{where}: zero denominator in {raw!r}") from exc
        try:
            return float(s)
        except ValueError as exc:
            raise InputError(f"{where}: cannot parse {raw!r} as a scalar") from exc
    raise InputError(f"{where}: expected a scalar literal, got {type(raw).__name__}")


def format_scalar(x: Any) -> Any:
    """JSON-ready literal: ``"p/q"`` for rationals, ``repr`` strings otherwise."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return {"re": repr(x.real), "im": repr(x.imag)}
    if isinstance(x, Number):
        return repr(float(x))
    raise TypeError(f"cannot format {type(x).__name__} as a scalar")


def is_exact(x: Any) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def exact_sqrt(x: Fraction) -> Fraction | None:
    """Rational square root of a nonnegative rational, or None if irrational."""
    x = Fraction(x)
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def discrepancy(a: Scalar, b: Scalar) -> float:
    """``|a - b| / max(|a|, |b|, 1)``, exactly 0.0 for equal rationals."""
    if is_exact(a) and is_exact(b):
        d = abs(Fraction(a) - Fraction(b))
        if d == 0:
            return 0.0
        return float(d / max(abs(Fraction(a)), abs(Fraction(b)), Fraction(1)))
    return abs(complex(a) - complex(b)) / max(abs(complex(a)), abs(complex(b)), 1.0)


def close(a: Scalar, b: Scalar, rel: float = 1e-12) -> bool:
    if is_exact(a) and is_exact(b):
        return Fraction(a) == Fraction(b)
    return discrepancy(a, b) <= rel


def log_scalar(x: Scalar) -> Scalar:
    """Natural log; complex log for complex or negative inputs."""
    if isinstance(x, complex):
        return cmath.log(x)
    if x > 0:
        return math.log(x)
    return cmath.log(complex(x))


def tanh(x: Scalar) -> Scalar:
    if isinstance(x, complex):
        return cmath.tanh(x)
    return math.tanh(x)


def cosh(x: Scalar) -> Scalar:
    if isinstance(x, complex):
        return cmath.cosh(x)
    return math.cosh(x)


def exp(x: Scalar) -> Scalar:
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def atanh(x: Scalar) -> Scalar:
    if isinstance(x, complex):
        return cmath.atanh(x)
    return math.atanh(x)
