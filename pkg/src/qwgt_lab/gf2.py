"""Linear algebra over GF(2) on packed bit words.

Vectors and matrix rows are stored as Python integers used as bitsets
(bit ``j`` is coordinate ``j``); the hot enumeration path converts them to
``uint64`` word arrays and works with numpy XOR/popcount.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, InputError, InstanceTooLarge

DEFAULT_CAP = 1 << 28
CAP_ENV_VAR = "QWGT_LAB_CAP"
WORD_BITS = 64


def default_cap() -> int:
    """Enumeration cap, honouring the ``QWGT_LAB_CAP`` environment variable."""
    raw = os.environ.get(CAP_ENV_VAR)
    if not raw:
        return DEFAULT_CAP
    try:
        cap = int(raw, 0)
    except ValueError as exc:
        raise InputError(f"{CAP_ENV_VAR}={raw!r} is not an integer") from exc
    if cap < 1:
        raise InputError(f"{CAP_ENV_VAR} must be positive, got {cap}")
    return cap


def _parity(x: int) -> int:
    return x.bit_count() & 1


@dataclass(frozen=True)
class Gf2Vector:
    """Fixed-length binary vector; ``bits`` holds coordinate j at bit j."""

    bits: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise DimensionError(f"negative vector length {self.length}")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionError(f"bits {self.bits:#x} do not fit in length {self.length}")

    @classmethod
    def zeros(cls, length: int) -> Gf2Vector:
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> Gf2Vector:
        return cls((1 << length) - 1, length)

    @classmethod
    def from_iterable(cls, entries: Iterable[int]) -> Gf2Vector:
        bits = 0
        n = 0
        for j, e in enumerate(entries):
            if e not in (0, 1):
                raise InputError(f"GF(2) entry at position {j} must be 0 or 1, got {e!r}")
            bits |= int(e) << j
            n = j + 1
        return cls(bits, n)

    @classmethod
    def unit(cls, j: int, length: int) -> Gf2Vector:
        if not 0 <= j < length:
            raise IndexError(f"unit index {j} out of range for length {length}")
        return cls(1 << j, length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, j: int) -> int:
        if j < 0:
            j += self.length
        if not 0 <= j < self.length:
            raise IndexError(f"index {j} out of range for length {self.length}")
        return (self.bits >> j) & 1

    def __iter__(self) -> Iterator[int]:
        return (((self.bits >> j) & 1) for j in range(self.length))

    def _check(self, other: Gf2Vector) -> None:
        if self.length != other.length:
            raise DimensionError(f"vector lengths differ: {self.length} vs {other.length}")

    def __xor__(self, other: Gf2Vector) -> Gf2Vector:
        self._check(other)
        return Gf2Vector(self.bits ^ other.bits, self.length)

    __add__ = __xor__

    def __and__(self, other: Gf2Vector) -> Gf2Vector:
        self._check(other)
        return Gf2Vector(self.bits & other.bits, self.length)

    def dot(self, other: Gf2Vector) -> int:
        """Inner product mod 2."""
        self._check(other)
        return _parity(self.bits & other.bits)

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0

    def to_list(self) -> list[int]:
        return list(self)

    def concat(self, other: Gf2Vector) -> Gf2Vector:
        return Gf2Vector(self.bits | (other.bits << self.length), self.length + other.length)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)


def hamming_weight(v: Gf2Vector) -> int:
    return v.weight


@dataclass(frozen=True)
class Gf2Matrix:
    """Dense binary matrix with rows packed as integers."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        for i, r in enumerate(self.rows):
            if r < 0 or r >> self.ncols:
                raise DimensionError(f"row {i} has bits beyond column {self.ncols}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> Gf2Matrix:
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        packed = []
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise DimensionError(f"row {i} has length {len(r)}, expected {ncols}")
            packed.append(Gf2Vector.from_iterable(r).bits if r else 0)
        return cls(tuple(packed), ncols)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> Gf2Matrix:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
        return cls.from_rows((arr % 2).astype(int).tolist(), arr.shape[1])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> Gf2Matrix:
        return cls((0,) * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> Gf2Matrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"entry ({i}, {j}) out of range for shape {self.shape}")
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> Gf2Vector:
        return Gf2Vector(self.rows[i], self.ncols)

    def column(self, j: int) -> Gf2Vector:
        return Gf2Vector(sum(((r >> j) & 1) << i for i, r in enumerate(self.rows)), self.nrows)

    def to_list(self) -> list[list[int]]:
        return [self.row(i).to_list() for i in range(self.nrows)]

    def to_array(self) -> np.ndarray:
        return np.array(self.to_list(), dtype=np.uint8).reshape(self.nrows, self.ncols)

    def transpose(self) -> Gf2Matrix:
        return Gf2Matrix(tuple(self.column(j).bits for j in range(self.ncols)), self.nrows)

    @property
    def T(self) -> Gf2Matrix:
        return self.transpose()

    def __xor__(self, other: Gf2Matrix) -> Gf2Matrix:
        if self.shape != other.shape:
            raise DimensionError(f"matrix shapes differ: {self.shape} vs {other.shape}")
        return Gf2Matrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    __add__ = __xor__

    def matvec(self, v: Gf2Vector) -> Gf2Vector:
        return matvec(self, v)

    def rank(self) -> int:
        return len(row_reduce(self)[1])

    def kernel_basis(self) -> KernelBasis:
        return kernel_basis(self)


def matvec(M: Gf2Matrix, v: Gf2Vector) -> Gf2Vector:
    """Return ``M v`` mod 2."""
    if v.length != M.ncols:
        raise DimensionError(f"matrix has {M.ncols} columns but vector has length {v.length}")
    bits = 0
    for i, r in enumerate(M.rows):
        bits |= _parity(r & v.bits) << i
    return Gf2Vector(bits, M.nrows)


def quadratic_form(B: Gf2Matrix, b: Gf2Vector) -> int:
    """Return ``b^T B b`` mod 2."""
    if not B.is_square():
        raise DimensionError(f"quadratic form needs a square matrix, got {B.shape}")
    if b.length != B.ncols:
        raise DimensionError(f"matrix is {B.nrows}x{B.ncols} but vector has length {b.length}")
    acc = 0
    for i, r in enumerate(B.rows):
        if (b.bits >> i) & 1:
            acc ^= _parity(r & b.bits)
    return acc


def row_reduce(M: Gf2Matrix) -> tuple[list[int], list[int]]:
    """Reduced row echelon form by leftmost-pivot elimination.

    Returns the nonzero reduced rows and their pivot columns.
    """
    work = list(M.rows)
    pivots: list[int] = []
    r = 0
    for col in range(M.ncols):
        mask = 1 << col
        p = next((i for i in range(r, len(work)) if work[i] & mask), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        for i in range(len(work)):
            if i != r and work[i] & mask:
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(M: Gf2Matrix) -> int:
    return M.rank()


@dataclass(frozen=True)
class KernelBasis:
    """Basis of ``{v : M v = 0}``; ``length`` is the ambient dimension."""

    vectors: tuple[Gf2Vector, ...]
    length: int

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[Gf2Vector]:
        return iter(self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def span(self) -> list[Gf2Vector]:
        """All 2^dim elements by direct coefficient expansion (small dims only)."""
        out = []
        for c in range(1 << self.dim):
            bits = 0
            for j, k in enumerate(self.vectors):
                if (c >> j) & 1:
                    bits ^= k.bits
            out.append(Gf2Vector(bits, self.length))
        return out


def kernel_basis(M: Gf2Matrix) -> KernelBasis:
    """Basis of the null space of ``M``, one vector per free column."""
    reduced, pivots = row_reduce(M)
    pivot_set = set(pivots)
    vectors = []
    for f in range(M.ncols):
        if f in pivot_set:
            continue
        bits = 1 << f
        for row, pc in zip(reduced, pivots):
            if (row >> f) & 1:
                bits |= 1 << pc
        vectors.append(Gf2Vector(bits, M.ncols))
    return KernelBasis(tuple(vectors), M.ncols)


# --- kernel enumeration ------------------------------------------------------


@dataclass(frozen=True)
class KernelStep:
    """One visited kernel element with its incrementally maintained metadata.

    ``parity`` is ``b . w`` for the registered ``w`` (0 if none) and ``quad`` is
    ``b^T B b`` for the registered ``B`` (0 if none). ``flipped`` is the index
    of the basis vector XORed in to reach this element, None for the first.
    """

    index: int
    vector: Gf2Vector
    weight: int
    parity: int
    quad: int
    flipped: int | None


@dataclass(frozen=True)
class EnumerationSummary:
    dim: int
    visited: int


def _check_cap(dim: int, cap: int | None, what: str = "kernel enumeration") -> None:
    cap = default_cap() if cap is None else cap
    if (1 << dim) > cap:
        raise InstanceTooLarge(what, 1 << dim, cap)


def _symmetrized(B: Gf2Matrix) -> list[int]:
    """Rows of B + B^T, used for the cross term of the quadratic form."""
    return list((B + B.transpose()).rows)


def _mul_rows(rows: Sequence[int], bits: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        out |= _parity(r & bits) << i
    return out


def iter_kernel(
    basis: KernelBasis,
    w: Gf2Vector | None = None,
    B: Gf2Matrix | None = None,
    cap: int | None = None,
) -> Iterator[KernelStep]:
    """Yield every element of the span of ``basis`` in reflected Gray-code order.

    Consecutive elements differ by exactly one basis vector. Weight, ``b . w``
    and ``b^T B b`` are updated in O(words) per step: with ``M = B + B^T``,
    ``q(b ^ k) = q(b) ^ q(k) ^ (M b) . k`` and ``M b`` itself is kept current.
    """
    n = basis.length
    if w is not None and w.length != n:
        raise DimensionError(f"w has length {w.length}, kernel vectors have length {n}")
    if B is not None and B.shape != (n, n):
        raise DimensionError(f"B has shape {B.shape}, expected ({n}, {n})")
    _check_cap(basis.dim, cap)

    ks = [k.bits for k in basis.vectors]
    kw = [k.bit_count() for k in ks]
    kpar = [_parity(k & w.bits) if w is not None else 0 for k in ks]
    if B is not None:
        sym = _symmetrized(B)
        kq = [quadratic_form(B, k) for k in basis.vectors]
        mk = [_mul_rows(sym, k) for k in ks]
    else:
        kq = [0] * len(ks)
        mk = [0] * len(ks)

    bits = weight = par = quad = mb = 0
    yield KernelStep(0, Gf2Vector(0, n), 0, 0, 0, None)
    for i in range(1, 1 << basis.dim):
        j = (i & -i).bit_length() - 1
        k = ks[j]
        weight += kw[j] - 2 * (bits & k).bit_count()
        par ^= kpar[j]
        quad ^= kq[j] ^ _parity(mb & k)
        mb ^= mk[j]
        bits ^= k
        yield KernelStep(i, Gf2Vector(bits, n), weight, par, quad, j)


def enumerate_kernel(
    basis: KernelBasis,
    visitor: Callable[[KernelStep], None],
    w: Gf2Vector | None = None,
    B: Gf2Matrix | None = None,
    cap: int | None = None,
) -> EnumerationSummary:
    """Call ``visitor`` on each kernel element (see :func:`iter_kernel`)."""
    count = 0
    for step in iter_kernel(basis, w=w, B=B, cap=cap):
        visitor(step)
        count += 1
    return EnumerationSummary(basis.dim, count)


def _words(bits: int, nwords: int) -> np.ndarray:
    mask = (1 << WORD_BITS) - 1
    return np.array([(bits >> (WORD_BITS * i)) & mask for i in range(nwords)], dtype=np.uint64)


def _popcount(arr: np.ndarray) -> np.ndarray:
    """Popcount summed over the word axis (axis 0)."""
    return np.bitwise_count(arr).sum(axis=0, dtype=np.int64)


def _dot_parity(vec_words: np.ndarray, block: np.ndarray) -> np.ndarray:
    return (_popcount(block & vec_words[:, None]) & 1).astype(np.uint8)


def kernel_histogram(
    basis: KernelBasis,
    B: Gf2Matrix | None = None,
    w: Gf2Vector | None = None,
    cap: int | None = None,
    block_bits: int = 16,
    threads: int = 1,
) -> np.ndarray:
    """Signed weight histogram of the span of ``basis``.

    Returns ``h`` of shape ``(2, n + 1)`` where ``h[s, k]`` counts kernel
    elements of Hamming weight ``k`` with ``b^T B b + b . w = s`` (mod 2).

    The coefficient space is split into a low block of ``block_bits`` basis
    vectors, materialised once in Gray-code order as a ``uint64`` word array,
    and the remaining high coefficients, walked in Gray-code order with one
    basis-vector update per step. High segments may be processed on several
    threads; integer counts make the result independent of the split.
    """
    n = basis.length
    if w is not None and w.length != n:
        raise DimensionError(f"w has length {w.length}, kernel vectors have length {n}")
    if B is not None and B.shape != (n, n):
        raise DimensionError(f"B has shape {B.shape}, expected ({n}, {n})")
    _check_cap(basis.dim, cap)

    # b.w == b^T dg(w) b, so fold w into the diagonal of B.
    diag = w.bits if w is not None else 0
    base_rows = list(B.rows) if B is not None else [0] * n
    eff = Gf2Matrix(tuple(r ^ (((diag >> i) & 1) << i) for i, r in enumerate(base_rows)), n)
    sym = _symmetrized(eff)
    has_cross = any(sym)

    nwords = max(1, -(-n // WORD_BITS))
    ks = [k.bits for k in basis.vectors]
    kq = [quadratic_form(eff, k) for k in basis.vectors]
    mk = [_mul_rows(sym, k) for k in ks]

    d_lo = min(basis.dim, block_bits)
    low = np.zeros((nwords, 1), dtype=np.uint64)
    low_q = np.zeros(1, dtype=np.uint8)
    for j in range(d_lo):
        rev = low[:, ::-1]
        kw_ = _words(ks[j], nwords)
        q_new = low_q[::-1] ^ np.uint8(kq[j])
        if has_cross:
            q_new = q_new ^ _dot_parity(_words(mk[j], nwords), rev)
        low = np.concatenate([low, rev ^ kw_[:, None]], axis=1)
        low_q = np.concatenate([low_q, q_new])

    hi = list(range(d_lo, basis.dim))
    nsteps = 1 << len(hi)
    width = n + 1

    def run(start: int, stop: int) -> np.ndarray:
        g = start ^ (start >> 1)
        h = 0
        for t, j in enumerate(hi):
            if (g >> t) & 1:
                h ^= ks[j]
        hq = quadratic_form(eff, Gf2Vector(h, n))
        mh = _mul_rows(sym, h)
        acc = np.zeros(2 * width, dtype=np.int64)
        for i in range(start, stop):
            if i != start:
                t = (i & -i).bit_length() - 1
                j = hi[t]
                hq ^= kq[j] ^ _parity(mh & ks[j])
                mh ^= mk[j]
                h ^= ks[j]
            block = low ^ _words(h, nwords)[:, None] if h else low
            weights = _popcount(block)
            signs = low_q ^ np.uint8(hq)
            if has_cross and mh:
                signs = signs ^ _dot_parity(_words(mh, nwords), low)
            acc += np.bincount(signs.astype(np.int64) * width + weights, minlength=2 * width)
        return acc

    threads = max(1, min(threads, nsteps))
    bounds = [nsteps * t // threads for t in range(threads + 1)]
    if threads == 1:
        total = run(0, nsteps)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, bounds[:-1], bounds[1:]))
        total = np.sum(parts, axis=0)
    return total.reshape(2, width)
