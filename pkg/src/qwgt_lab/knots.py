"""Kauffman bracket at q = 2 through the Potts/Ising correspondence.

Crossing signs on a dual lattice give complex Potts couplings
``beta J_e = log(-A^(-4 b_e))``. At ``q = 2`` the Potts weight splits as
``exp(K delta) = exp(K/2) exp(K/2 sigma_i sigma_j)``, so the Potts sum is a
prefactor times a +-J Ising sum with uniform complex ``lambda``; the latter
is a QWGT with complex ``x``. The bracket itself is only determined up to a
spin-independent constant, so everything here returns ``Z_Potts(q=2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InputError, InstanceTooLarge
from .gf2 import Gf2Vector
from .graph import Graph, graph_from_json
from .scalars import parse_scalar
from .spinglass import SpinGlassInstance, evaluate_kernel

ORACLE_GUARD = 24
REDUCTION_TOL = 1e-9
_SINGULAR = 1e-12


@dataclass(frozen=True)
class CrossingAssignment:
    """Dual lattice with one converted crossing sign ``b_e`` per edge.

    ``crossing_sign`` already has vertical edges negated relative to the raw
    diagram crossings; use :meth:`from_raw` to apply that conversion.
    """

    lattice: Graph
    crossing_sign: tuple[int, ...]
    orientation: tuple[str, ...]

    def __post_init__(self) -> None:
        E = self.lattice.num_edges
        object.__setattr__(self, "crossing_sign", tuple(int(b) for b in self.crossing_sign))
        object.__setattr__(self, "orientation", tuple(self.orientation))
        if len(self.crossing_sign) != E or len(self.orientation) != E:
            raise DimensionError(
                f"lattice has {E} edges but got {len(self.crossing_sign)} signs and {len(self.orientation)} orientations"
            )
        for e, b in enumerate(self.crossing_sign):
            if b not in (1, -1):
                raise InputError(f"crossing sign at edge {e} must be +1 or -1, got {b}")
        for e, o in enumerate(self.orientation):
            if o not in ("h", "v"):
                raise InputError(f"orientation at edge {e} must be 'h' or 'v', got {o!r}")

    @classmethod
    def from_raw(cls, lattice: Graph, raw: Sequence[int], orientation: Sequence[str] | None = None) -> CrossingAssignment:
        """Convert raw crossing values: kept on horizontal edges, negated on vertical ones."""
        if orientation is None:
            orientation = ["h"] * lattice.num_edges
        if len(raw) != len(orientation):
            raise DimensionError(f"{len(raw)} crossings but {len(orientation)} orientation tags")
        signs = [-b if o == "v" else b for b, o in zip(raw, orientation)]
        return cls(lattice, tuple(signs), tuple(orientation))


def q_of_A(A: complex) -> complex:
    """Potts state count ``(A^2 + A^-2)^2``."""
    if A == 0:
        raise DomainError("Kauffman variable A must be nonzero")
    A = complex(A)
    return (A**2 + A**-2) ** 2


def A_of_q(q: complex, tol: float = 1e-12) -> list[complex]:
    """The four roots ``+-sqrt((sqrt(q) +- sqrt(q - 4)) / 2)`` (principal branches).

    Roots failing the round trip ``q_of_A(root) == q`` within ``tol`` (relative
    to ``max(1, |q|)``) are dropped.
    """
    q = complex(q)
    rq, rq4 = cmath.sqrt(q), cmath.sqrt(q - 4)
    roots = []
    for inner in ((rq + rq4) / 2, (rq - rq4) / 2):
        a = cmath.sqrt(inner)
        roots.extend([a, -a])
    scale = max(1.0, abs(q))
    return [r for r in roots if r != 0 and abs(q_of_A(r) - q) <= tol * scale]


def _coupling(A: complex, b: int) -> complex:
    z = -(complex(A) ** (-4 * b))
    # adding 0.0 turns a signed -0.0 imaginary part into +0.0, so negative reals map to +i pi
    return cmath.log(complex(z.real, z.imag + 0.0))


def kauffman_couplings(A: complex, cfg: CrossingAssignment) -> list[complex]:
    """Per-edge ``beta J_e = log(-A^(-4 b_e))``, principal branch."""
    if A == 0:
        raise DomainError("Kauffman variable A must be nonzero")
    return [_coupling(A, b) for b in cfg.crossing_sign]


def potts_q2_direct(G: Graph, beta_j: Sequence[complex], guard: int = ORACLE_GUARD) -> complex:
    """``sum_s prod_e exp(beta J_e delta(s_i, s_j))`` over all two-state configurations."""
    V = G.num_vertices
    if len(beta_j) != G.num_edges:
        raise DimensionError(f"{len(beta_j)} couplings for {G.num_edges} edges")
    if V > guard:
        raise InstanceTooLarge("oracle (direct Potts sum)", 1 << V, 1 << guard)
    s = np.arange(1 << V, dtype=np.int64)
    log_w = np.zeros(s.shape, dtype=np.complex128)
    for (i, j), k in zip(G.edges, beta_j):
        same = (((s >> i) ^ (s >> j)) & 1) == 0
        log_w += np.where(same, complex(k), 0)
    terms = np.exp(log_w)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True)
class IsingReduction:
    """``Z_Potts(2) = prefactor * Z_Ising(w, beta_j)`` with ``lam = tanh(beta_j)``."""

    w: Gf2Vector
    lam: complex
    beta_j: complex
    prefactor: complex


def potts2_to_ising(beta_j: Sequence[complex], reference: complex | None = None) -> IsingReduction:
    """Rewrite q = 2 Potts couplings as a uniform +-J Ising coupling.

    Each edge contributes ``exp(beta J_e / 2)`` to the prefactor and an Ising
    coupling ``K_e = beta J_e / 2``. ``K_e`` must equal ``+-K`` modulo ``i pi``
    for the reference ``K = reference / 2`` (default: the first edge), so that
    ``tanh(K_e) = +-tanh(K)``; the minus sign sets ``w_e = 1``. Shifts by
    ``i pi`` flip ``cosh(K_e)``, and that sign is folded into the prefactor.
    """
    ks = [complex(b) / 2 for b in beta_j]
    if reference is not None:
        k_ref = complex(reference) / 2
    elif ks:
        k_ref = ks[0]
    else:
        k_ref = 0j
    c_ref = cmath.cosh(k_ref)
    if abs(c_ref) < _SINGULAR:
        raise DomainError(f"branch-singular coupling: cosh(beta_j / 2) = 0 at beta_j = {2 * k_ref}")
    lam = cmath.tanh(k_ref)
    if abs(abs(lam) - 1) < _SINGULAR and abs(lam.imag) < _SINGULAR:
        raise DomainError(f"branch-singular coupling: lambda = {lam}")
    scale = max(1.0, abs(lam))
    bits = []
    sign = 1
    for e, k in enumerate(ks):
        c = cmath.cosh(k)
        if abs(c) < _SINGULAR:
            raise DomainError(f"branch-singular coupling on edge {e}: cosh(beta_j / 2) = 0")
        lam_e = cmath.tanh(k)
        if abs(lam_e - lam) <= REDUCTION_TOL * scale:
            bits.append(0)
        elif abs(lam_e + lam) <= REDUCTION_TOL * scale:
            bits.append(1)
        else:
            raise DomainError(f"not reducible to +-J form: edge {e} has tanh = {lam_e}, reference {lam}")
        ratio = c / c_ref
        if abs(ratio - 1) <= REDUCTION_TOL:
            continue
        if abs(ratio + 1) <= REDUCTION_TOL:
            sign = -sign
            continue
        raise DomainError(f"not reducible to +-J form: edge {e} has cosh ratio {ratio}")
    w = Gf2Vector.from_iterable(bits) if bits else Gf2Vector.zeros(0)
    prefactor = sign * cmath.exp(sum(beta_j, 0j) / 2)
    return IsingReduction(w, lam, k_ref, prefactor)


@dataclass(frozen=True)
class KauffmanResult:
    """``value = Z_Potts(q=2)``; the bracket equals it up to an unspecified constant."""

    value: complex
    prefactor: complex
    lam: complex
    w: Gf2Vector
    kernel_dim: int
    bracket_up_to_constant: bool = True


def kauffman_q2_via_qwgt(A: complex, cfg: CrossingAssignment, cap: int | None = None, threads: int = 1) -> KauffmanResult:
    """Potts q = 2 partition function via the complex-``x`` QWGT ``S(A_inc, dg(w), lambda, 1)``."""
    if A == 0:
        raise DomainError("Kauffman variable A must be nonzero")
    couplings = kauffman_couplings(A, cfg)
    plus = _coupling(A, 1)
    red = potts2_to_ising(couplings, reference=plus)
    ev = evaluate_kernel(SpinGlassInstance(cfg.lattice, red.w, beta_j=red.beta_j), cap=cap, threads=threads)
    return KauffmanResult(red.prefactor * ev.Z, red.prefactor, red.lam, red.w, ev.kernel_dim)


def crossing_from_json(obj: Any, where: str = "crossing") -> tuple[CrossingAssignment, complex]:
    """Parse ``{"lattice": graph, "crossings": [...], "orientation": [...], "A": lit}``.

    ``crossings`` are raw diagram values; vertical edges are negated on load.
    """
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    for key in ("lattice", "crossings", "A"):
        if key not in obj:
            raise InputError(f"{where}: missing key {key!r}")
    lattice, _ = graph_from_json(obj["lattice"], f"{where}.lattice")
    raw = obj["crossings"]
    if not isinstance(raw, list) or any(isinstance(b, bool) or b not in (1, -1) for b in raw):
        raise InputError(f"{where}.crossings: expected a list of +1/-1")
    orient = obj.get("orientation")
    if orient is not None and (not isinstance(orient, list) or any(o not in ("h", "v") for o in orient)):
        raise InputError(f"{where}.orientation: expected a list of 'h'/'v'")
    if len(raw) != lattice.num_edges or (orient is not None and len(orient) != lattice.num_edges):
        raise InputError(f"{where}: crossings/orientation must have one entry per lattice edge ({lattice.num_edges})")
    A = complex(parse_scalar(obj["A"], f"{where}.A"))
    if A == 0:
        raise InputError(f"{where}.A: Kauffman variable must be nonzero")
    return CrossingAssignment.from_raw(lattice, raw, orient), A
