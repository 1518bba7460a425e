import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_qwgt, random_matrix, random_rational, random_vector
from qwgt_lab.errors import DimensionError, DomainError, InputError, InstanceTooLarge
from qwgt_lab.gf2 import Gf2Matrix, Gf2Vector
from qwgt_lab.qwgt import (
    QwgtInstance,
    diag_of,
    dg,
    kl_sign,
    ltr,
    qwgt_bound_check,
    qwgt_bruteforce,
    qwgt_from_json,
    qwgt_kernel,
    qwgt_to_json,
    evaluate_weight_polynomial,
    weight_polynomial_partial_sums,
)
from qwgt_lab.scalars import discrepancy

F = Fraction
LOWER = Gf2Matrix.from_rows([[0, 0], [1, 0]])


def examples():
    x, y = F(2, 3), F(-5, 7)
    return [
        (QwgtInstance(Gf2Matrix.identity(2), Gf2Matrix.zeros(2, 2), x, y), y**2),
        (QwgtInstance(Gf2Matrix.zeros(1, 2), Gf2Matrix.zeros(2, 2), x, y), y**2 + 2 * x * y + x**2),
        (QwgtInstance(Gf2Matrix.zeros(2, 2), LOWER, F(1), F(1)), F(2)),
    ]


@pytest.mark.parametrize("idx", range(3))
def test_bruteforce_and_kernel_examples(idx):
    inst, expected = examples()[idx]
    assert qwgt_bruteforce(inst) == expected
    assert qwgt_kernel(inst) == expected
    assert brute_qwgt(inst.A, inst.B, inst.x, inst.y) == expected


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        QwgtInstance(Gf2Matrix.identity(2), Gf2Matrix.zeros(3, 3), 1, 1)
    with pytest.raises(DimensionError):
        QwgtInstance(Gf2Matrix.identity(2), Gf2Matrix.zeros(2, 3), 1, 1)


def test_oracle_guard():
    inst = QwgtInstance(Gf2Matrix.zeros(0, 5), Gf2Matrix.zeros(5, 5), F(1), F(1))
    with pytest.raises(InstanceTooLarge):
        qwgt_bruteforce(inst, guard=4)


def _random_instance(rng, n_max=14, exact=True):
    n = rng.randint(1, n_max)
    A = random_matrix(rng, rng.randint(0, 14), n, density=rng.random())
    B = random_matrix(rng, n, n)
    if exact:
        x = random_rational(rng, F(-3), F(3))
        y = random_rational(rng, F(-3), F(3))
    else:
        x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
    return QwgtInstance(A, B, x, y)


def test_kernel_matches_independent_oracle(rng):
    for _ in range(40):
        inst = _random_instance(rng, n_max=9)
        expected = brute_qwgt(inst.A, inst.B, inst.x, inst.y)
        assert qwgt_kernel(inst) == expected
        assert qwgt_bruteforce(inst) == expected


def test_bound_examples():
    n = 5
    inst = QwgtInstance(Gf2Matrix.zeros(1, n), Gf2Matrix.zeros(n, n), F(1), F(1))
    value = qwgt_kernel(inst)
    assert value == 2**n
    assert qwgt_bound_check(inst, value)
    assert not qwgt_bound_check(inst, F(2**n + 1))


def test_bound_holds_on_random_real_instances(rng):
    for _ in range(100):
        inst = _random_instance(rng, exact=False)
        assert qwgt_bound_check(inst, qwgt_kernel(inst))


def test_rational_and_real_evaluations_agree(rng):
    for _ in range(50):
        inst = _random_instance(rng)
        exact = qwgt_kernel(inst)
        real = qwgt_kernel(QwgtInstance(inst.A, inst.B, float(inst.x), float(inst.y)))
        assert isinstance(real, float)
        assert discrepancy(real, float(exact)) <= 1e-12


def test_complex_scalars(rng):
    inst = _random_instance(rng, n_max=8)
    c = QwgtInstance(inst.A, inst.B, complex(inst.x), complex(inst.y))
    assert abs(qwgt_kernel(c) - float(qwgt_kernel(inst))) <= 1e-12 * max(1, abs(float(qwgt_kernel(inst))))
    i_inst = QwgtInstance(Gf2Matrix.zeros(0, 2), Gf2Matrix.zeros(2, 2), 1j, 1)
    assert qwgt_kernel(i_inst) == pytest.approx((1 + 1j) ** 2)


def test_symmetric_part_of_b_is_irrelevant_off_diagonal(rng):
    # b^T (M + M^T) b = 0 mod 2 when M has zero diagonal, so adding it leaves S unchanged
    for _ in range(20):
        inst = _random_instance(rng, n_max=10)
        M = ltr(random_matrix(rng, inst.n, inst.n))
        shifted = QwgtInstance(inst.A, inst.B ^ M ^ M.T, inst.x, inst.y)
        assert qwgt_kernel(shifted) == qwgt_kernel(inst)


def test_ltr_diag_dg_examples():
    I3 = Gf2Matrix.identity(3)
    assert all(r == 0 for r in ltr(I3).rows)
    assert dg(Gf2Vector.from_iterable([1, 0])).to_list() == [[1, 0], [0, 0]]
    assert diag_of(Gf2Matrix.from_rows([[1, 1], [1, 0]])).to_list() == [[1, 0], [0, 0]]
    full = Gf2Matrix.from_rows([[1, 1, 1], [1, 1, 1], [1, 1, 1]])
    assert ltr(full).to_list() == [[0, 0, 0], [1, 0, 0], [1, 1, 0]]
    for fn in (ltr, diag_of):
        with pytest.raises(DimensionError):
            fn(Gf2Matrix.zeros(2, 3))


@settings(max_examples=60)
@given(st.integers(1, 8), st.data())
def test_ltr_plus_diag_plus_upper_is_whole(n, data):
    rows = data.draw(st.lists(st.integers(0, 2**n - 1), min_size=n, max_size=n))
    M = Gf2Matrix(tuple(rows), n)
    upper = ltr(M.T).T
    assert (ltr(M) ^ diag_of(M) ^ upper) == M


def test_kl_examples():
    r = kl_sign(Gf2Matrix.identity(2), 1, 2)
    assert (r.value, r.sign_symbol, r.promise_holds) == (4, "+", True)
    for n in (1, 3, 5):
        r = kl_sign(Gf2Matrix.identity(n), 2, 3)
        assert r.value == 3**n and r.sign == 1

    A = Gf2Matrix.from_rows([[1, 0], [1, 1]])
    r = kl_sign(A, 1, 1)
    expected = brute_qwgt(A, ltr(A), F(1), F(1))
    assert r.value == expected == qwgt_kernel(QwgtInstance(A, ltr(A), F(1), F(1)))


def test_kl_promise_can_fail():
    # unit lower-triangular A is invertible, so S = l^n = 1 while the bound is 2^(3/2) / 2
    A = Gf2Matrix.from_rows([[1, 0, 0], [1, 1, 0], [1, 1, 1]])
    r = kl_sign(A, 1, 1)
    assert r.value == 1 and r.sign == 1
    assert not r.promise_holds


def test_kl_negative_sign():
    # kernel of the all-ones 2x2 is {00, 11}; ltr contributes b2 b1, so S = l^2 - k^2
    A = Gf2Matrix.from_rows([[1, 1], [1, 1]])
    r = kl_sign(A, 3, 1)
    assert r.value == 1 - 9 and r.sign_symbol == "-"
    assert r.value == brute_qwgt(A, ltr(A), F(3), F(1))


def test_kl_violations_reported_individually():
    with pytest.raises(DomainError) as exc:
        kl_sign(Gf2Matrix.zeros(2, 2), 0, -1)
    msg = str(exc.value)
    assert "diag(A)" in msg and "k must be" in msg and "l must be" in msg
    with pytest.raises(DomainError, match="square"):
        kl_sign(Gf2Matrix.zeros(2, 3), 1, 1)


def test_json_roundtrip():
    inst = qwgt_from_json({"A": [], "B": [[0, 0], [1, 0]], "x": "1/2", "y": 1.5})
    assert inst.n == 2 and inst.x == F(1, 2) and inst.y == 1.5
    again = qwgt_from_json(qwgt_to_json(inst))
    assert again == inst
    c = qwgt_from_json({"A": [[1, 1]], "B": [[0, 0], [0, 0]], "x": {"re": 0, "im": 1}, "y": 1})
    assert c.x == 1j


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ({"A": [[1]], "B": [[0]], "x": 1}, "'y'"),
        ({"A": [[1, 0]], "B": [[0]], "x": 1, "y": 1}, "columns"),
        ({"A": [[2]], "B": [[0]], "x": 1, "y": 1}, r"A\[0\]\[0\]"),
        ({"A": [[1], [1, 0]], "B": [[0]], "x": 1, "y": 1}, r"A\[1\]"),
        ({"A": [[1]], "B": [[0]], "x": "abc", "y": 1}, r"\.x"),
        ({"A": [[1]], "B": [[0]], "x": "1/0", "y": 1}, "zero denominator"),
    ],
)
def test_json_errors(obj, fragment):
    with pytest.raises(InputError, match=fragment):
        qwgt_from_json(obj)


def test_gauge_of_dg_is_invariant_on_kernel():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(2, 12)
        A = random_matrix(rng, rng.randint(1, n), n)
        w = random_vector(rng, n)
        v = random_vector(rng, A.nrows)
        w2 = w ^ Gf2Vector(sum(((A.T.rows[j] & v.bits).bit_count() & 1) << j for j in range(n)), n)
        x = random_rational(rng, F(-1), F(1))
        s1 = qwgt_kernel(QwgtInstance(A, dg(w), x, F(1)))
        s2 = qwgt_kernel(QwgtInstance(A, dg(w2), x, F(1)))
        assert s1 == s2


def test_weight_polynomial_survives_cancellation():
    # (1 - x^2)^7 expanded: terms near 1e1 summing to about 1e-5 at x = 0.898
    counts = [0] * 15
    for j in range(8):
        counts[2 * j] = (-1) ** j * math.comb(7, j)
    x = 0.8984385867763307
    exact = (1 - F(x) ** 2) ** 7
    got = evaluate_weight_polynomial(counts, x, 1.0)
    assert isinstance(got, float)
    assert abs(got - float(exact)) <= 1e-15 * float(exact)
    z = evaluate_weight_polynomial(counts, complex(x, 0), 1.0)
    assert z == complex(float(exact), 0)


def test_weight_polynomial_types_and_partials():
    assert evaluate_weight_polynomial([1, 2, 1], F(1, 2), F(1)) == F(9, 4)
    assert evaluate_weight_polynomial([0, 0], F(1, 2), 1.0) == 0.0
    assert evaluate_weight_polynomial([1, 0, 1], 1j, 1) == 0
    assert weight_polynomial_partial_sums([1, -3, 3, -1], F(1, 2), F(1)) == [1, F(-1, 2), F(1, 4), F(1, 8)]
    with pytest.raises(DomainError):
        evaluate_weight_polynomial([1, 1], math.inf, 1.0)
