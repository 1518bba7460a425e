"""Exact quadratically signed weight enumerators and +-J Ising partition functions."""

from .errors import DimensionError, DomainError, InputError, InstanceTooLarge, QwgtLabError
from .gf2 import Gf2Matrix, Gf2Vector, KernelBasis, enumerate_kernel, iter_kernel, kernel_basis, matvec, quadratic_form
from .graph import Graph, augment_star, cycle_space_dimension, gauge_transform, incidence_matrix, parity_vector
from .knots import CrossingAssignment, kauffman_q2_via_qwgt, potts_q2_direct
from .qwgt import QwgtInstance, dg, diag_of, kl_sign, ltr, qwgt_bound_check, qwgt_bruteforce, qwgt_kernel
from .spinglass import (
    SpinGlassInstance,
    partition_direct,
    partition_double_transform,
    partition_kernel,
    partition_series,
    partition_uniform,
    partition_with_field,
    qwgt_bridge,
)

__version__ = "0.1.0"
