import random
from fractions import Fraction

import pytest

from builders import disc, random_bc_case, random_dims
from deskcat import linalg as la
from deskcat.coeff import IntegerRing, Matrix, RationalField
from deskcat.corpus import random_bundle, random_groupoid, random_kernel
from deskcat.groupoid import classifying, cyclic_group, discrete, point, symmetric_group
from deskcat.kernelcalc import (AdjointMissing, BCSquare, FootMismatch, KernelMap, act, associator,
                                beck_chevalley_check, class_direct, class_of, column_kernel, convolve, duality_data,
                                identity_kernel, kernel_from_dims, kernel_right_adjoint, left_unitor, mate,
                                right_unitor, trace_comparison, trace_functoriality, trace_lt_ag, trace_via_duality)
from deskcat.sheafcalc import Bundle, BundleMap, hom_basis, trivial_bundle
from oracles import bc_mate_oracle, conjugacy_class_count, diagonal_sum, mate_invertible, matrix_product

QQ = RationalField()


def test_convolve_discrete_is_matrix_product():
    rng = random.Random(1)
    for _ in range(40):
        n, m, k = (rng.randint(1, 4) for _ in range(3))
        A, B = random_dims(rng, n, m, 3), random_dims(rng, m, k, 3)
        K = convolve(kernel_from_dims(disc(n, "a"), disc(m, "b"), A), kernel_from_dims(disc(m, "b"), disc(k, "c"), B))
        assert K.dim_matrix() == matrix_product(A, B)


def test_convolve_foot_mismatch():
    K = kernel_from_dims(disc(2, "a"), disc(2, "b"), [[1, 0], [0, 1]])
    with pytest.raises(FootMismatch):
        convolve(K, K)


def test_convolve_associator_iso():
    rng = random.Random(2)
    for _ in range(8):
        Ys = [random_groupoid(rng, 6, 2) for _ in range(4)]
        Ks = [random_kernel(Ys[i], Ys[i + 1], rng, max_dim=1) for i in range(3)]
        a = associator(*Ks)
        assert a.is_iso()
        assert a.source.dim_matrix() == a.target.dim_matrix()


def test_identity_kernel():
    X = discrete("abc")
    assert identity_kernel(X).dim_matrix() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    G = symmetric_group(3)
    I = identity_kernel(classifying(G))
    assert I.dim(0, 0) == 6
    assert sorted(I.bundle.labels(0)) == sorted(G.labels)


def test_unitors_iso():
    rng = random.Random(3)
    for _ in range(10):
        Y1, Y2 = random_groupoid(rng, 6, 3), random_groupoid(rng, 6, 3)
        K = random_kernel(Y1, Y2, rng, max_dim=1)
        assert left_unitor(K).is_iso() and right_unitor(K).is_iso()


def test_act_discrete():
    X1, X2 = disc(2, "x"), disc(3, "y")
    K = kernel_from_dims(X1, X2, [[1, 0, 2], [0, 3, 1]])
    V = Bundle(X1, [2, 1])
    assert act(K, V).dims == (2, 3, 5)


def test_act_identity_kernel():
    rng = random.Random(4)
    for _ in range(10):
        Y = random_groupoid(rng, 6, 3)
        V = random_bundle(Y, rng)
        assert act(identity_kernel(Y), V).dims == V.dims


def test_trace_matrix_example():
    M = Matrix.from_lists([[5, 1], [2, 7]], QQ)
    assert trace_via_duality(M) == trace_lt_ag(M) == 12
    Z = Matrix.from_lists([[0, 0], [0, 0]], QQ)
    assert trace_via_duality(Z) == 0


def test_trace_identity_S3():
    G = symmetric_group(3)
    I = identity_kernel(classifying(G))
    assert trace_via_duality(I).dim == 3 == conjugacy_class_count(G.mul, range(G.n))


def test_trace_zero_kernel():
    Y = random_groupoid(random.Random(5), 6, 3)
    K = random_kernel(Y, Y, random.Random(6), max_dim=0)
    assert trace_lt_ag(K).dim == 0


def test_trace_comparison_random():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randint(1, 4)
        D = random_dims(rng, n, n, 3)
        via, lt, M, ok = trace_comparison(kernel_from_dims(disc(n, "x"), disc(n, "x"), D))
        assert ok and lt.dim == via.dim == diagonal_sum(D)
    for _ in range(15):
        Y = random_groupoid(rng, 8, 3)
        assert trace_comparison(random_kernel(Y, Y, rng, max_dim=1))[3]


def test_duality_zigzag():
    rng = random.Random(8)
    for _ in range(8):
        Y = random_groupoid(rng, 8, 3)
        D = duality_data(Y)
        assert D.zigzag.is_iso()
    D = duality_data(classifying(cyclic_group(3)))
    assert D.counit(D.unit).dim == 3


# ------------------------------------------------------------- adjoints

def test_right_adjoint_identity():
    Y = classifying(cyclic_group(2))
    adj = kernel_right_adjoint(identity_kernel(Y))
    assert adj is not None
    assert adj.KR.dim_matrix() == [[2]]


def test_right_adjoint_permutation():
    X = disc(3, "x")
    K = kernel_from_dims(X, X, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    adj = kernel_right_adjoint(K)
    assert adj.KR.dim_matrix() == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]


def test_right_adjoint_column_and_random():
    rng = random.Random(9)
    for _ in range(12):
        Y = random_groupoid(rng, 6, 3)
        assert kernel_right_adjoint(column_kernel(random_bundle(Y, rng))) is not None
        Y2 = random_groupoid(rng, 6, 3)
        assert kernel_right_adjoint(random_kernel(Y, Y2, rng, max_dim=1)) is not None


# ------------------------------------------------------------ Beck-Chevalley

def test_bc_identity_square():
    X = disc(2, "x")
    I = identity_kernel(X)
    for side in ("left", "right"):
        ok, w = beck_chevalley_check(BCSquare(I, I, I, I), side)
        assert ok, w


def test_bc_proper_square_passes():
    # {1,2} -> {*} along the identity: base change for a proper map
    A, B = discrete([1, 2]), point()
    h = kernel_from_dims(A, B, [[1], [1]], "h")
    I_A, I_B = identity_kernel(A), identity_kernel(B)
    ok, w = beck_chevalley_check(BCSquare(h, I_B, I_A, h))
    assert ok, w


def test_bc_mismatched_square_fails():
    A, B = discrete([1, 2]), point()
    f = kernel_from_dims(A, B, [[1], [1]], "f")
    ok, w = beck_chevalley_check(BCSquare(f, identity_kernel(B), f, identity_kernel(B)))
    assert not ok
    assert w["failure"]["dims"] == (2, 1)


def test_bc_matches_oracle():
    rng = random.Random(10)
    for _ in range(20):
        sq, (F, G, P, Q, gam), (C, B) = random_bc_case(rng)
        M = mate(sq)
        want = bc_mate_oracle(F, G, P, Q, gam)
        for (c, b), (Mo, ns, nt) in want.items():
            assert (M.source.dim(c, b), M.target.dim(c, b)) == (ns, nt)
            if ns and nt:
                assert M.at(c, b) == Mo
        assert beck_chevalley_check(sq)[0] == mate_invertible(want)


def test_bc_edge_without_adjoint():
    X = disc(1, "x")
    I = identity_kernel(X)
    bad = Matrix.from_lists([[Fraction(1, 2)]], QQ)
    with pytest.raises(AdjointMissing):
        mate(BCSquare(I, I, bad, I))
    with pytest.raises(AdjointMissing):
        mate(BCSquare(I, I, Matrix.from_lists([[2]], IntegerRing()), I))


# --------------------------------------------------- classes, functoriality

def test_class_of_unit():
    Y = point()
    I, G = identity_kernel(Y), trivial_bundle(Y)
    A = act(I, G)
    assert class_of(G, BundleMap(G, A, lambda x: [[1]]), I) == [1]


def test_class_of_diagonal_scalar():
    X = discrete("abc")
    K = kernel_from_dims(X, X, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    G = Bundle(X, [0, 1, 0])
    A = act(K, G)
    alpha = BundleMap(G, A, lambda x: [[5]] if x == 1 else [])
    assert class_of(G, alpha, K) == class_direct(G, alpha, K) == [0, 5, 0]


def test_class_of_random_matches_direct():
    rng = random.Random(11)
    n = 0
    while n < 10:
        Y = random_groupoid(rng, 6, 3)
        K = identity_kernel(Y)
        G = random_bundle(Y, rng, max_dim=1)
        A = act(K, G)
        if A.dims != G.dims:
            continue
        # any equivariant map G -> act(I, G): scale a fixed iso
        basis = hom_basis(G, A)
        if not basis:
            continue
        alpha = basis[0]
        for b in basis[1:]:
            alpha = alpha + b.scaled(rng.randint(-2, 2))
        assert class_of(G, alpha, K) == class_direct(G, alpha, K)
        n += 1


def test_trace_functoriality_identity():
    rng = random.Random(12)
    for _ in range(6):
        Y = random_groupoid(rng, 6, 3)
        F = random_kernel(Y, Y, rng, max_dim=1)
        I = identity_kernel(Y)
        alpha = right_unitor(F, convolve(F, I)).then(left_unitor(F, convolve(I, F)).inverse())
        M = trace_functoriality(I, alpha)
        assert M == la.identity(trace_lt_ag(F).dim)


def test_trace_functoriality_proper_sums_fibers():
    X, P = discrete([1, 2]), point()
    H = kernel_from_dims(X, P, [[1], [1]], "h")
    F1 = kernel_from_dims(X, X, [[1, 0], [0, 1]], "F1")
    F2 = kernel_from_dims(P, P, [[1]], "F2")
    FH, HF = convolve(F1, H), convolve(H, F2)
    c = [[[2]], [[7]]]
    alpha = KernelMap(FH, HF, BundleMap(FH.bundle, HF.bundle, lambda z: c[z]))
    assert trace_functoriality(H, alpha) == [[2, 7]]
