import random
from fractions import Fraction
from itertools import product

import pytest

from deskcat.coeff import (BooleanQuantale, IntegerRing, Matrix, NaturalSemiring, RationalField, TropicalQuantale,
                           UnsupportedCoefficient, chain_quantale, coeff_from_spec, group_powerset_quantale,
                           is_invertible, mat_mul, q_linear_solve, quantale_law_violations)
from oracles import matrix_product

QUANTALES = [BooleanQuantale(), TropicalQuantale(9), TropicalQuantale(3), chain_quantale(),
             group_powerset_quantale(2), group_powerset_quantale(3)]


def test_residuate_examples():
    B = BooleanQuantale()
    assert B.residuate(0, 1) == 1
    assert B.residuate(1, 0) == 0
    assert TropicalQuantale(9).residuate(2, 5) == 3


def test_tropical_residuate_brute_force():
    T = TropicalQuantale(9)
    for a, b in product(T.elements(), repeat=2):
        # largest in the lattice order = numerically smallest x with x + a >= b
        cands = [x for x in T.elements() if T.leq(T.mul(x, a), b)]
        best = min(cands)
        assert T.residuate(a, b) == best


@pytest.mark.parametrize("Q", QUANTALES, ids=lambda q: q.name)
def test_quantale_laws(Q):
    assert quantale_law_violations(Q) == []


@pytest.mark.parametrize("Q", QUANTALES, ids=lambda q: q.name)
def test_residuation_adjunction(Q):
    for a, b, x in product(Q.elements(), repeat=3):
        assert Q.leq(Q.mul(x, a), b) == Q.leq(x, Q.residuate(a, b))


def test_tropical_order_is_reversed():
    T = TropicalQuantale(9)
    assert T.leq(5, 2) and not T.leq(2, 5)
    assert T.bottom == T.coerce("inf") and T.top == 0 and T.one == 0
    assert T.mul(7, 6) == 9  # capped


def test_chain3_unit_below_top():
    C = chain_quantale()
    assert C.one == 1 and C.top == 2 and C.lt(C.one, C.top)


def test_mat_mul_examples():
    Q = RationalField()
    A = Matrix.from_lists([[1, 2], [0, 1]], Q)
    B = Matrix.from_lists([[1, 0], [3, 1]], Q)
    assert mat_mul(A, B).tolist() == [[7, 2], [3, 1]]
    I = Matrix.identity(range(2), Q)
    assert mat_mul(I, A) == A


def test_boolean_reachability():
    B = BooleanQuantale()
    path = Matrix.from_lists([[1, 1, 0], [0, 1, 1], [0, 0, 1]], B)
    two = mat_mul(path, path)
    assert two.tolist()[0][2] == 1


def test_mat_mul_associative_random():
    rng = random.Random(5)
    Q = RationalField()
    for _ in range(50):
        n, m, k, l = (rng.randint(1, 4) for _ in range(4))

        def rnd(r, c):
            return Matrix.from_lists([[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(c)]
                                      for _ in range(r)], Q)
        A, B, C = rnd(n, m), rnd(m, k), rnd(k, l)
        assert mat_mul(mat_mul(A, B), C) == mat_mul(A, mat_mul(B, C))
        assert mat_mul(A, B).tolist() == matrix_product(A.tolist(), B.tolist())


def test_q_linear_solve_examples():
    Q = RationalField()
    r = q_linear_solve(Matrix.from_lists([[0, 0], [0, 0]], Q))
    assert r.rank == 0 and len(r.kernel) == 2
    assert q_linear_solve(Matrix.from_lists([[1, 1], [1, 1]], Q)).rank == 1
    avg = Matrix.from_lists([[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 2)]], Q)
    assert q_linear_solve(avg).rank == 1


def test_q_linear_solve_kernel_is_kernel():
    rng = random.Random(9)
    Q = RationalField()
    for _ in range(40):
        m, n = rng.randint(1, 4), rng.randint(1, 5)
        A = Matrix.from_lists([[rng.randint(-2, 2) for _ in range(n)] for _ in range(m)], Q)
        r = q_linear_solve(A)
        assert r.rank + len(r.kernel) == n
        for v in r.kernel:
            assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in A.entries)


def test_rationals_normal_form():
    Q = RationalField()
    x = Q.coerce(Fraction(4, -6))
    assert x == Fraction(-2, 3) and x.denominator == 3


def test_natural_semiring_has_no_inverse():
    N = NaturalSemiring()
    with pytest.raises(UnsupportedCoefficient):
        N.inv(2)
    with pytest.raises(UnsupportedCoefficient):
        q_linear_solve(Matrix.from_lists([[1]], N))


def test_invertibility_depends_on_coefficients():
    assert is_invertible(Matrix.from_lists([[2]], RationalField()))
    assert not is_invertible(Matrix.from_lists([[2]], IntegerRing()))
    assert is_invertible(Matrix.from_lists([[-1]], IntegerRing()))


def test_coeff_from_spec():
    assert coeff_from_spec("tropical(4)").cap == 4
    assert coeff_from_spec({"tropical": 5}).cap == 5
    assert coeff_from_spec("boolean").elements() == (0, 1)
    with pytest.raises(ValueError):
        coeff_from_spec("octonions")
