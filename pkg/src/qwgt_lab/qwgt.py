"""Quadratically signed weight enumerators.

``S(A, B, x, y) = sum over b with A b = 0 of (-1)^(b^T B b) x^|b| y^(n - |b|)``

Two independent evaluation routes are provided: :func:`qwgt_bruteforce` scans
all of ``{0,1}^n`` and tests membership in the kernel, :func:`qwgt_kernel`
walks only the kernel of ``A`` in Gray-code order. Both reduce to a signed
weight histogram of integers before any scalar arithmetic happens, so the
result is deterministic and exact for ``Fraction`` inputs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence, Union

import numpy as np

from .errors import DimensionError, DomainError, InputError, InstanceTooLarge
from .gf2 import Gf2Matrix, Gf2Vector, kernel_basis, kernel_histogram
from .scalars import Scalar, format_scalar, is_exact, parse_scalar

ORACLE_GUARD = 24
_CHUNK = 1 << 20


@dataclass(frozen=True)
class QwgtInstance:
    A: Gf2Matrix
    B: Gf2Matrix
    x: Scalar
    y: Scalar

    def __post_init__(self) -> None:
        if not self.B.is_square():
            raise DimensionError(f"B must be square, got shape {self.B.shape}")
        if self.B.ncols != self.A.ncols:
            raise DimensionError(f"A has {self.A.ncols} columns but B is {self.B.nrows}x{self.B.ncols}")

    @property
    def n(self) -> int:
        return self.A.ncols


def ltr(M: Gf2Matrix) -> Gf2Matrix:
    """Strictly lower-triangular part: entries on or above the diagonal cleared."""
    if not M.is_square():
        raise DimensionError(f"ltr needs a square matrix, got {M.shape}")
    return Gf2Matrix(tuple(r & ((1 << i) - 1) for i, r in enumerate(M.rows)), M.ncols)


def diag_of(M: Gf2Matrix) -> Gf2Matrix:
    if not M.is_square():
        raise DimensionError(f"diag_of needs a square matrix, got {M.shape}")
    return Gf2Matrix(tuple(r & (1 << i) for i, r in enumerate(M.rows)), M.ncols)


def dg(w: Gf2Vector) -> Gf2Matrix:
    """Diagonal matrix carrying ``w``."""
    return Gf2Matrix(tuple(((w.bits >> i) & 1) << i for i in range(w.length)), w.length)


def _fsum(terms: Sequence[Any]) -> Scalar:
    if any(isinstance(t, complex) for t in terms):
        return complex(math.fsum(t.real for t in terms), math.fsum(complex(t).imag for t in terms))
    if all(is_exact(t) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def signed_counts(hist: np.ndarray) -> list[int]:
    """Collapse a ``(2, n + 1)`` sign/weight histogram to ``plus - minus`` per weight."""
    return [int(p) - int(m) for p, m in zip(hist[0], hist[1])]


# Weight polynomials are evaluated in exact rational arithmetic even for float
# and complex inputs: each input is converted to a rational without rounding
# and only the final sum is rounded. Signed counts cancel heavily at low
# temperature on frustrated graphs, and a float sum would lose digits there.
# Complex values are carried as (real, imag) pairs of Fractions.

_Exact = Union[Fraction, tuple[Fraction, Fraction]]


def _kind(*values: Scalar) -> str:
    if any(isinstance(v, complex) for v in values):
        return "complex"
    if all(is_exact(v) for v in values):
        return "exact"
    return "real"


def _to_exact(v: Scalar) -> _Exact:
    if isinstance(v, complex):
        return (Fraction(v.real), Fraction(v.imag))
    return Fraction(v)


def _mul(a: _Exact, b: _Exact) -> _Exact:
    if isinstance(a, tuple) or isinstance(b, tuple):
        ar, ai = a if isinstance(a, tuple) else (a, Fraction(0))
        br, bi = b if isinstance(b, tuple) else (b, Fraction(0))
        return (ar * br - ai * bi, ar * bi + ai * br)
    return a * b


def _scaled_add(acc: _Exact, c: int, t: _Exact) -> _Exact:
    if isinstance(acc, tuple) or isinstance(t, tuple):
        ar, ai = acc if isinstance(acc, tuple) else (acc, Fraction(0))
        tr, ti = t if isinstance(t, tuple) else (t, Fraction(0))
        return (ar + c * tr, ai + c * ti)
    return acc + c * t


def _from_exact(v: _Exact, kind: str) -> Scalar:
    if kind == "complex":
        re_, im_ = v if isinstance(v, tuple) else (v, Fraction(0))
        return complex(float(re_), float(im_))
    if kind == "real":
        return float(v)
    return v


def _finite(*values: Scalar) -> bool:
    return all(cmath.isfinite(v) if isinstance(v, complex) else math.isfinite(v) for v in values)


def _pow(v: _Exact, k: int) -> _Exact:
    if not isinstance(v, tuple):
        return v**k
    out: _Exact = Fraction(1)
    while k:
        if k & 1:
            out = _mul(out, v)
        v = _mul(v, v)
        k >>= 1
    return out


def _powers(v: _Exact, top: int) -> list[_Exact]:
    out: list[_Exact] = [Fraction(1)]
    for _ in range(top):
        out.append(_mul(out[-1], v))
    return out


def weight_polynomial_partial_sums(counts: Sequence[int], x: Scalar, y: Scalar) -> list[Scalar]:
    """``[sum_{j <= k} counts[j] x^j y^(n-j) for k = 0..n]``, each rounded once."""
    n = len(counts) - 1
    kind = _kind(x, y)
    if not _finite(x, y):
        raise DomainError(f"weight polynomial needs finite scalars, got x = {x}, y = {y}")
    nonzero = [k for k, c in enumerate(counts) if c]
    ex, ey = _to_exact(x), _to_exact(y)
    xp = _powers(ex, nonzero[-1] if nonzero else 0)
    yp = _powers(ey, n - nonzero[0] if nonzero else 0)
    acc: _Exact = Fraction(0)
    out = []
    for k, c in enumerate(counts):
        if c:
            acc = _scaled_add(acc, c, _mul(xp[k], yp[n - k]))
        out.append(_from_exact(acc, kind))
    return out


def evaluate_weight_polynomial(counts: Sequence[int], x: Scalar, y: Scalar) -> Scalar:
    """``sum_k counts[k] x^k y^(n-k)``, exact until a single final rounding."""
    if not counts:
        return _from_exact(Fraction(0), _kind(x, y))
    return weight_polynomial_partial_sums(counts, x, y)[-1]


def qwgt_bruteforce(inst: QwgtInstance, guard: int = ORACLE_GUARD) -> Scalar:
    """Evaluate S by scanning every ``b`` in ``{0,1}^n`` (oracle path)."""
    n = inst.n
    if n > guard:
        raise InstanceTooLarge("oracle (brute-force QWGT)", 1 << n, 1 << guard)
    a_rows = [np.uint64(r) for r in inst.A.rows]
    b_rows = [np.uint64(r) for r in inst.B.rows]
    plus = [0] * (n + 1)
    minus = [0] * (n + 1)
    total = 1 << n
    for start in range(0, total, _CHUNK):
        b = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
        ok = np.ones(b.shape, dtype=bool)
        for r in a_rows:
            ok &= (np.bitwise_count(b & r) & 1) == 0
        b = b[ok]
        quad = np.zeros(b.shape, dtype=np.uint8)
        for i, r in enumerate(b_rows):
            bi = ((b >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
            quad ^= bi & (np.bitwise_count(b & r) & 1).astype(np.uint8)
        weight = np.bitwise_count(b).astype(np.int64)
        for k, c in enumerate(np.bincount(weight[quad == 0], minlength=n + 1)):
            plus[k] += int(c)
        for k, c in enumerate(np.bincount(weight[quad == 1], minlength=n + 1)):
            minus[k] += int(c)
    # plain powers per term, independent of the power tables used elsewhere
    kind = _kind(inst.x, inst.y)
    if not _finite(inst.x, inst.y):
        raise DomainError(f"weight polynomial needs finite scalars, got x = {inst.x}, y = {inst.y}")
    ex, ey = _to_exact(inst.x), _to_exact(inst.y)
    acc: _Exact = Fraction(0)
    for k in range(n + 1):
        if plus[k] != minus[k]:
            acc = _scaled_add(acc, plus[k] - minus[k], _mul(_pow(ex, k), _pow(ey, n - k)))
    return _from_exact(acc, kind)


def qwgt_histogram(inst: QwgtInstance, cap: int | None = None, threads: int = 1) -> np.ndarray:
    """Sign/weight histogram of the kernel of ``A`` under the form ``b^T B b``."""
    return kernel_histogram(kernel_basis(inst.A), B=inst.B, cap=cap, threads=threads)


def qwgt_kernel(inst: QwgtInstance, cap: int | None = None, threads: int = 1) -> Scalar:
    """Evaluate S by Gray-code enumeration of the kernel of ``A``."""
    counts = signed_counts(qwgt_histogram(inst, cap=cap, threads=threads))
    return evaluate_weight_polynomial(counts, inst.x, inst.y)


def qwgt_bound_check(inst: QwgtInstance, value: Scalar, rel: float = 1e-12) -> bool:
    """True iff ``|value| <= (|x| + |y|)^n`` (exactly for rationals)."""
    bound = (abs(inst.x) + abs(inst.y)) ** inst.n
    if is_exact(value) and is_exact(bound):
        return abs(Fraction(value)) <= bound
    return abs(value) <= float(bound) * (1 + rel)


# --- KL promise problem --------------------------------------------------------


@dataclass(frozen=True)
class KlResult:
    """Sign of ``S(A, ltr(A), k, l)`` and whether the promise gap holds."""

    sign: int
    promise_holds: bool
    value: int
    n: int
    k: int
    l: int

    @property
    def sign_symbol(self) -> str:
        return {1: "+", -1: "-", 0: "0"}[self.sign]

    @property
    def promise_bound(self) -> float:
        return (self.k**2 + self.l**2) ** (self.n / 2) / 2


def kl_violations(A: Gf2Matrix, k: Any, l: Any) -> list[str]:
    problems = []
    if not A.is_square():
        problems.append(f"A must be square, got shape {A.shape}")
    elif diag_of(A) != Gf2Matrix.identity(A.ncols):
        problems.append("diag(A) must be the identity")
    for name, val in (("k", k), ("l", l)):
        if not isinstance(val, int) or isinstance(val, bool) or val <= 0:
            problems.append(f"{name} must be a positive integer, got {val!r}")
    return problems


def kl_sign(A: Gf2Matrix, k: int, l: int, guard: int = ORACLE_GUARD) -> KlResult:
    """Decide the sign of ``S(A, ltr(A), k, l)`` and check ``|S| >= (k^2+l^2)^(n/2) / 2``.

    The sum is computed exactly with integer arithmetic; the promise is
    checked as ``4 S^2 >= (k^2 + l^2)^n`` so no square root is taken.
    """
    problems = kl_violations(A, k, l)
    if problems:
        raise DomainError("; ".join(problems))
    inst = QwgtInstance(A, ltr(A), Fraction(k), Fraction(l))
    value = qwgt_bruteforce(inst, guard=guard)
    assert value.denominator == 1
    s = int(value)
    sign = (s > 0) - (s < 0)
    return KlResult(sign, 4 * s * s >= (k * k + l * l) ** A.ncols, s, A.ncols, k, l)


# --- JSON ----------------------------------------------------------------------


def matrix_from_json(raw: Any, where: str, ncols: int | None = None) -> Gf2Matrix:
    if not isinstance(raw, list):
        raise InputError(f"{where}: expected a list of rows")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list):
            raise InputError(f"{where}[{i}]: expected a list of 0/1")
        for j, x in enumerate(row):
            if isinstance(x, bool) or x not in (0, 1):
                raise InputError(f"{where}[{i}][{j}]: expected 0 or 1, got {x!r}")
        rows.append(row)
    if rows:
        width = len(rows[0])
        if ncols is not None and width != ncols:
            raise InputError(f"{where}: rows have {width} columns, expected {ncols}")
        for i, row in enumerate(rows):
            if len(row) != width:
                raise InputError(f"{where}[{i}]: length {len(row)} differs from row 0 ({width})")
        return Gf2Matrix.from_rows(rows, width)
    if ncols is None:
        raise InputError(f"{where}: empty matrix with unknown column count")
    return Gf2Matrix.zeros(0, ncols)


def qwgt_from_json(obj: Any, where: str = "instance") -> QwgtInstance:
    """Parse ``{"A": [[...]], "B": [[...]], "x": lit, "y": lit}``; ``A`` may be ``[]``."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    for key in ("A", "B", "x", "y"):
        if key not in obj:
            raise InputError(f"{where}: missing key {key!r}")
    B = matrix_from_json(obj["B"], f"{where}.B")
    A = matrix_from_json(obj["A"], f"{where}.A", ncols=B.ncols if not obj["A"] else None)
    x = parse_scalar(obj["x"], f"{where}.x")
    y = parse_scalar(obj["y"], f"{where}.y")
    try:
        return QwgtInstance(A, B, x, y)
    except DimensionError as exc:
        raise InputError(f"{where}: {exc}") from exc


def qwgt_to_json(inst: QwgtInstance) -> dict:
    return {
        "A": inst.A.to_list(),
        "B": inst.B.to_list(),
        "x": format_scalar(inst.x),
        "y": format_scalar(inst.y),
    }


__all__ = [
    "QwgtInstance",
    "ltr",
    "diag_of",
    "dg",
    "qwgt_bruteforce",
    "qwgt_kernel",
    "qwgt_histogram",
    "qwgt_bound_check",
    "kl_sign",
    "KlResult",
    "evaluate_weight_polynomial",
    "weight_polynomial_partial_sums",
    "signed_counts",
    "qwgt_from_json",
    "qwgt_to_json",
]
