"""Partition function of the +-J Ising spin glass on an arbitrary graph.

Every evaluation route reduces to integer counts first (configurations by
number of frustrated bonds, or subgraphs by weight and sign) and applies the
coupling last, so rational couplings give exact answers and floating-point
answers do not depend on enumeration order or thread count.

Conventions: spins are bits ``s_i`` with ``sigma_i = (-1)^s_i``; bonds are bits
``w_e`` with ``J_e = (-1)^w_e J`` (0 ferromagnetic, 1 antiferromagnetic);
``lambda = tanh(beta J)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, InstanceTooLarge
from .gf2 import Gf2Vector, default_cap, kernel_basis, kernel_histogram
from .graph import Graph, augment_star, incidence_matrix
from .qwgt import (
    QwgtInstance,
    _fsum,
    dg,
    evaluate_weight_polynomial,
    qwgt_kernel,
    signed_counts,
    weight_polynomial_partial_sums,
)
from .scalars import Scalar, atanh, cosh, exact_sqrt, exp, is_exact, tanh

ORACLE_GUARD = 24
DOUBLE_TRANSFORM_VERTEX_GUARD = 20
_CHUNK = 1 << 20
_SINGULAR = 1e-12


def lambda_of(beta_j: Scalar) -> Scalar:
    """``tanh(beta J)``; complex couplings use the analytic continuation."""
    return tanh(beta_j)


def theta_of(beta_j: Scalar, num_edges: int) -> Scalar:
    """``cosh(beta J) ** |E|``."""
    return cosh(beta_j) ** num_edges


@dataclass(frozen=True)
class SpinGlassInstance:
    """A graph, its bond signs ``w`` and one coupling: ``beta_j`` or ``lam``.

    Supplying ``beta_j`` fixes every prefactor as ``cosh(beta J) ** |E|``.
    Supplying only ``lam`` uses ``(1 - lam^2) ** (-|E|/2)``, kept exact for
    rational ``lam`` whenever the power is rational (``|E|`` even or
    ``1 - lam^2`` a rational square).
    """

    graph: Graph
    w: Gf2Vector
    beta_j: Scalar | None = None
    lam: Scalar | None = None

    def __post_init__(self) -> None:
        if (self.beta_j is None) == (self.lam is None):
            raise ValueError("give exactly one of beta_j or lam")
        if self.w.length != self.graph.num_edges:
            raise DimensionError(f"w has length {self.w.length}, graph has {self.graph.num_edges} edges")
        if self.beta_j is not None:
            if abs(cosh(self.beta_j)) < _SINGULAR:
                raise DomainError(f"branch-singular coupling: cosh(beta_j) = 0 at beta_j = {self.beta_j}")
        else:
            lam = self.lam
            if isinstance(lam, complex):
                if abs(lam - 1) < _SINGULAR or abs(lam + 1) < _SINGULAR:
                    raise DomainError(f"branch-singular coupling: lambda = {lam}")
            elif abs(lam) >= 1:
                raise DomainError(f"zero-temperature singularity: |lambda| = {abs(lam)} >= 1")

    @classmethod
    def ferro(cls, graph: Graph, **coupling: Scalar) -> SpinGlassInstance:
        return cls(graph, Gf2Vector.zeros(graph.num_edges), **coupling)

    def with_w(self, w: Gf2Vector) -> SpinGlassInstance:
        return SpinGlassInstance(self.graph, w, beta_j=self.beta_j, lam=self.lam)

    def with_graph(self, graph: Graph, w: Gf2Vector) -> SpinGlassInstance:
        return SpinGlassInstance(graph, w, beta_j=self.beta_j, lam=self.lam)

    @property
    def num_vertices(self) -> int:
        return self.graph.num_vertices

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    @property
    def lambda_value(self) -> Scalar:
        if self.lam is not None:
            return self.lam
        return lambda_of(self.beta_j)

    def effective_beta_j(self) -> Scalar:
        """``beta J``, recovered as ``atanh(lam)`` when only ``lam`` was given."""
        if self.beta_j is not None:
            return self.beta_j
        return atanh(self.lam if isinstance(self.lam, complex) else float(self.lam))

    def bond_factor(self) -> Scalar:
        """``exp(beta J)``, rational when ``lam`` is rational and ``(1+lam)/(1-lam)`` is a square."""
        if self.beta_j is None and is_exact(self.lam):
            r = exact_sqrt((1 + self.lam) / (1 - self.lam))
            if r is not None:
                return r
        return exp(self.effective_beta_j())

    def theta(self) -> Scalar:
        """The per-graph factor ``cosh(beta J) ** |E|``."""
        E = self.num_edges
        if self.beta_j is not None:
            return theta_of(self.beta_j, E)
        lam = self.lam
        if is_exact(lam):
            d = 1 - lam * lam
            if E % 2 == 0:
                return 1 / d ** (E // 2)
            s = exact_sqrt(d)
            if s is not None:
                return 1 / s**E
            return float(d) ** (-E / 2)
        if isinstance(lam, complex):
            return cosh(atanh(lam)) ** E
        return (1 - lam * lam) ** (-E / 2)

    def prefactor(self) -> Scalar:
        """``2^|V| cosh(beta J)^|E|``, the factor in front of the even-subgraph sum."""
        return 2**self.num_vertices * self.theta()

    def unit(self) -> Scalar:
        """Multiplicative one in the scalar field of the coupling."""
        return self.lambda_value ** 0


# --- direct spin sums ------------------------------------------------------------


def _check_spins(inst: SpinGlassInstance, s: Gf2Vector) -> None:
    if s.length != inst.num_vertices:
        raise DimensionError(f"spin vector has length {s.length}, graph has {inst.num_vertices} vertices")


def energy(inst: SpinGlassInstance, s: Gf2Vector) -> int:
    """``H / J = -sum_e (-1)^w_e sigma_i sigma_j`` for spin bits ``s``."""
    _check_spins(inst, s)
    total = 0
    for e, (i, j) in enumerate(inst.graph.edges):
        frustrated = ((s.bits >> i) ^ (s.bits >> j) ^ (inst.w.bits >> e)) & 1
        total += 1 if frustrated else -1
    return total


def _weight_of_energy(inst: SpinGlassInstance, h: int) -> Scalar:
    """``exp(-beta J h)``, exact when the bond factor is rational."""
    r = inst.bond_factor()
    if is_exact(r):
        return r ** (-h)
    return exp(-inst.effective_beta_j() * h)


def frustration_counts(G: Graph, w: Gf2Vector, guard: int = ORACLE_GUARD) -> list[int]:
    """Number of spin configurations with exactly ``m`` frustrated bonds, for each ``m``."""
    V, E = G.num_vertices, G.num_edges
    if V > guard:
        raise InstanceTooLarge("oracle (direct spin sum)", 1 << V, 1 << guard)
    counts = np.zeros(E + 1, dtype=np.int64)
    total = 1 << V
    for start in range(0, total, _CHUNK):
        s = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        m = np.zeros(s.shape, dtype=np.int64)
        for e, (i, j) in enumerate(G.edges):
            m += ((s >> i) ^ (s >> j) ^ ((w.bits >> e) & 1)) & 1
        counts += np.bincount(m, minlength=E + 1)
    return [int(c) for c in counts]


def partition_direct(inst: SpinGlassInstance, guard: int = ORACLE_GUARD) -> Scalar:
    """Sum ``exp(-beta H)`` over all ``2^|V|`` spin configurations."""
    E = inst.num_edges
    counts = frustration_counts(inst.graph, inst.w, guard=guard)
    # m frustrated bonds means H/J = 2m - |E|
    terms = [c * _weight_of_energy(inst, 2 * m - E) for m, c in enumerate(counts) if c]
    return _fsum(terms)


def boltzmann_weight(inst: SpinGlassInstance, s: Gf2Vector) -> Scalar:
    return _weight_of_energy(inst, energy(inst, s))


def gibbs_probability(inst: SpinGlassInstance, s: Gf2Vector, guard: int = ORACLE_GUARD) -> Scalar:
    """``exp(-beta H(s)) / Z``."""
    return boltzmann_weight(inst, s) / partition_direct(inst, guard=guard)


# --- subgraph (Fourier) expansions -------------------------------------------------


def _subgraph_table(G: Graph, w: Gf2Vector, guard: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every subgraph ``b`` in ``{0,1}^|E|``: parity vector ``A b``, ``|b|`` and ``b . w``."""
    E = G.num_edges
    if E > guard:
        raise InstanceTooLarge("oracle (subgraph scan)", 1 << E, 1 << guard)
    if G.num_vertices > 62:
        raise InstanceTooLarge("oracle (subgraph scan, vertex words)", G.num_vertices, 62)
    b = np.arange(1 << E, dtype=np.int64)
    alpha = np.zeros(b.shape, dtype=np.int64)
    for e, mask in enumerate(G.edge_masks()):
        alpha ^= np.where((b >> e) & 1, mask, 0)
    weight = np.bitwise_count(b).astype(np.int64)
    bw = (np.bitwise_count(b & w.bits) & 1).astype(np.int64)
    return alpha, weight, bw


def boltzmann_weight_fourier(inst: SpinGlassInstance, s: Gf2Vector, guard: int = ORACLE_GUARD) -> Scalar:
    """``Theta * sum_b lambda^|b| (-1)^(alpha^b . s + b . w)`` over all ``2^|E|`` subgraphs."""
    _check_spins(inst, s)
    E = inst.num_edges
    alpha, weight, bw = _subgraph_table(inst.graph, inst.w, guard)
    sign = (np.bitwise_count(alpha & s.bits) & 1) ^ bw
    plus = np.bincount(weight[sign == 0], minlength=E + 1)
    minus = np.bincount(weight[sign == 1], minlength=E + 1)
    counts = [int(p) - int(m) for p, m in zip(plus, minus)]
    return inst.theta() * evaluate_weight_polynomial(counts, inst.lambda_value, inst.unit())


def _walsh_hadamard(table: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along axis 0 (length a power of two)."""
    out = table.copy()
    N, K = out.shape
    h = 1
    while h < N:
        v = out.reshape(N // (2 * h), 2, h, K)
        a = v[:, 0].copy()
        v[:, 0] += v[:, 1]
        v[:, 1] = a - v[:, 1]
        h *= 2
    return out


def partition_double_transform(
    inst: SpinGlassInstance,
    guard: int = ORACLE_GUARD,
    vertex_guard: int = DOUBLE_TRANSFORM_VERTEX_GUARD,
) -> Scalar:
    """``Theta * sum_s sum_b lambda^|b| (-1)^(alpha^b . s + b . w)``.

    The subgraph sum is binned by parity vector into a ``2^|V| x (|E|+1)``
    integer table, the spin sum is a Walsh-Hadamard transform over the
    parity axis, and the transformed table is summed over all ``s``.
    """
    V, E = inst.num_vertices, inst.num_edges
    if V > vertex_guard:
        raise InstanceTooLarge("oracle (double transform, spins)", 1 << V, 1 << vertex_guard)
    alpha, weight, bw = _subgraph_table(inst.graph, inst.w, guard)
    table = np.zeros((1 << V, E + 1), dtype=np.int64)
    np.add.at(table, (alpha, weight), 1 - 2 * bw)
    spectrum = _walsh_hadamard(table)
    counts = [int(c) for c in spectrum.sum(axis=0)]
    return inst.theta() * evaluate_weight_polynomial(counts, inst.lambda_value, inst.unit())


# --- kernel (even-subgraph) evaluation -----------------------------------------------


@dataclass(frozen=True)
class KernelEvaluation:
    """``Z = prefactor * weighted_sum`` where ``weighted_sum = S(A, dg(w), lambda, 1)``."""

    Z: Scalar
    weighted_sum: Scalar
    prefactor: Scalar
    kernel_dim: int
    counts: tuple[int, ...]

    @property
    def terms(self) -> int:
        return 1 << self.kernel_dim


def evaluate_kernel(inst: SpinGlassInstance, cap: int | None = None, threads: int = 1) -> KernelEvaluation:
    """Sum ``lambda^|b| (-1)^(b . w)`` over the cycle space only."""
    basis = kernel_basis(incidence_matrix(inst.graph))
    hist = kernel_histogram(basis, w=inst.w, cap=cap, threads=threads)
    counts = signed_counts(hist)
    S = evaluate_weight_polynomial(counts, inst.lambda_value, inst.unit())
    pref = inst.prefactor()
    return KernelEvaluation(pref * S, S, pref, basis.dim, tuple(counts))


def partition_kernel(inst: SpinGlassInstance, cap: int | None = None, threads: int = 1) -> Scalar:
    return evaluate_kernel(inst, cap=cap, threads=threads).Z


@dataclass(frozen=True)
class BridgeResult:
    """Both sides of ``(1 - lambda^2)^(|E|/2) / 2^|V| * Z = S(A, dg(w), lambda, 1)``."""

    lhs: Scalar
    rhs: Scalar
    Z: Scalar
    z_method: str


def qwgt_bridge(inst: SpinGlassInstance, cap: int | None = None, guard: int = ORACLE_GUARD) -> BridgeResult:
    """Left side from the direct spin sum (kernel route if too large); right side
    from the QWGT engine on ``(incidence matrix, dg(w), lambda, 1)``."""
    if inst.num_vertices <= guard:
        Z, method = partition_direct(inst, guard=guard), "direct"
    else:
        Z, method = partition_kernel(inst, cap=cap), "kernel"
    lhs = Z / inst.prefactor()
    q = QwgtInstance(incidence_matrix(inst.graph), dg(inst.w), inst.lambda_value, inst.unit())
    return BridgeResult(lhs, qwgt_kernel(q, cap=cap), Z, method)


@dataclass(frozen=True)
class SeriesResult:
    """Partial sums of the high-temperature series, one per order ``0..max_order``."""

    partial_sums: tuple[Scalar, ...]
    coefficients: tuple[int, ...]
    exact: Scalar | None
    terms_evaluated: int


def _even_subgraph_counts_by_order(
    G: Graph, w: Gf2Vector, max_order: int, cap: int
) -> tuple[list[int], int]:
    """Signed counts of zero-parity subgraphs for each weight ``0..max_order``."""
    E = G.num_edges
    needed = sum(comb(E, k) for k in range(max_order + 1))
    if needed > cap:
        raise InstanceTooLarge("series enumeration", needed, cap)
    coeffs = [0] * (max_order + 1)
    if E <= 22 and G.num_vertices <= 62:
        alpha, weight, bw = _subgraph_table(G, w, guard=E)
        keep = (alpha == 0) & (weight <= max_order)
        signed = 1 - 2 * bw[keep]
        for k, c in enumerate(np.bincount(weight[keep], weights=signed, minlength=max_order + 1)):
            coeffs[k] = int(c)
        return coeffs, needed
    masks = G.edge_masks()
    for k in range(max_order + 1):
        # subgraphs of each weight in the order itertools.combinations gives
        for combo in itertools.combinations(range(E), k):
            alpha = 0
            bw = 0
            for e in combo:
                alpha ^= masks[e]
                bw ^= (w.bits >> e) & 1
            if alpha == 0:
                coeffs[k] += -1 if bw else 1
    return coeffs, needed


def partition_series(inst: SpinGlassInstance, max_order: int | None = None, cap: int | None = None) -> SeriesResult:
    """High-temperature expansion in powers of ``lambda`` by subgraph edge count.

    Order ``k`` collects every zero-parity subgraph with ``k`` edges, signed by
    ``(-1)^(b . w)``. At ``max_order >= |E|`` the last partial sum is exact.
    """
    E = inst.num_edges
    if max_order is None:
        max_order = E
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    order = min(max_order, E)
    cap = default_cap() if cap is None else cap
    coeffs, visited = _even_subgraph_counts_by_order(inst.graph, inst.w, order, cap)
    pref = inst.prefactor()
    sums = weight_polynomial_partial_sums(coeffs, inst.lambda_value, inst.unit())
    # orders beyond |E| add nothing
    partial = [pref * sums[min(k, order)] for k in range(max_order + 1)]
    exact = partial[-1] if max_order >= E else None
    return SeriesResult(tuple(partial), tuple(coeffs), exact, visited)


def partition_uniform(inst: SpinGlassInstance, cap: int | None = None, threads: int = 1) -> Scalar:
    """Fully ferro (``w = 0``) or fully antiferro (``w = 1``) partition function.

    Counts even subgraphs by weight only and folds the bond sign into
    ``(+-lambda)^|b|``.
    """
    w = inst.w
    if w.bits == 0:
        lam = inst.lambda_value
    elif w.bits == (1 << w.length) - 1:
        lam = -inst.lambda_value
    else:
        raise ValueError("partition_uniform needs w all-zero or all-one")
    basis = kernel_basis(incidence_matrix(inst.graph))
    counts = [int(c) for c in kernel_histogram(basis, cap=cap, threads=threads)[0]]
    return inst.prefactor() * evaluate_weight_polynomial(counts, lam, inst.unit())


# --- magnetic field ---------------------------------------------------------------


def field_signs_from_values(values: Sequence[Scalar]) -> Gf2Vector:
    """Convert fields ``B_i / J`` to sign bits; only ``|B_i| = |J|`` is representable."""
    bits = []
    for i, v in enumerate(values):
        if v == 1:
            bits.append(0)
        elif v == -1:
            bits.append(1)
        else:
            raise DomainError(f"field at vertex {i} is {v} J; only |B_i| = |J| fits the +-J star construction")
    return Gf2Vector.from_iterable(bits) if bits else Gf2Vector.zeros(0)


def _check_field(inst: SpinGlassInstance, field_signs: Gf2Vector) -> None:
    if field_signs.length != inst.num_vertices:
        raise DimensionError(f"field signs have length {field_signs.length}, graph has {inst.num_vertices} vertices")


def partition_with_field(
    inst: SpinGlassInstance, field_signs: Gf2Vector, cap: int | None = None, threads: int = 1
) -> Scalar:
    """Partition function with field ``B_i = (-1)^field_signs[i] J``.

    The field becomes bonds to an extra hub spin; the hub's two states give
    equal sums by global spin flip, so the field partition function is half
    the augmented one.
    """
    _check_field(inst, field_signs)
    star, ext = augment_star(inst.graph, field_signs)
    Z = partition_kernel(inst.with_graph(star, inst.w.concat(ext)), cap=cap, threads=threads)
    return Z / 2


def partition_direct_with_field(inst: SpinGlassInstance, field_signs: Gf2Vector, guard: int = ORACLE_GUARD) -> Scalar:
    """``sum_sigma exp(-beta (H - sum_i B_i sigma_i))`` by direct enumeration."""
    _check_field(inst, field_signs)
    V = inst.num_vertices
    if V > guard:
        raise InstanceTooLarge("oracle (direct field sum)", 1 << V, 1 << guard)
    E = inst.num_edges
    s = np.arange(1 << V, dtype=np.int64)
    # unsatisfied bonds plus spins anti-aligned with their field
    m = np.zeros(s.shape, dtype=np.int64)
    for e, (i, j) in enumerate(inst.graph.edges):
        m += ((s >> i) ^ (s >> j) ^ ((inst.w.bits >> e) & 1)) & 1
    for i in range(V):
        m += ((s >> i) ^ ((field_signs.bits >> i) & 1)) & 1
    counts = np.bincount(m, minlength=E + V + 1)
    terms = [int(c) * _weight_of_energy(inst, 2 * k - E - V) for k, c in enumerate(counts) if c]
    return _fsum(terms)


__all__ = [
    "SpinGlassInstance",
    "lambda_of",
    "theta_of",
    "energy",
    "partition_direct",
    "boltzmann_weight",
    "gibbs_probability",
    "boltzmann_weight_fourier",
    "partition_double_transform",
    "evaluate_kernel",
    "partition_kernel",
    "KernelEvaluation",
    "qwgt_bridge",
    "BridgeResult",
    "partition_series",
    "SeriesResult",
    "partition_uniform",
    "partition_with_field",
    "partition_direct_with_field",
    "field_signs_from_values",
    "frustration_counts",
]
