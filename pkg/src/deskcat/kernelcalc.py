"""Kernels on products of groupoids, convolution and traces.

A kernel K on Y1 x Y2 is read as a functor Shv(Y1) -> Shv(Y2). Composition
runs left to right: convolve(A, B) is "A then B", so
act(convolve(A, B), V) = act(B, act(A, V)).
"""
from functools import lru_cache

from . import linalg as la
from .coeff import Matrix, RationalField
from .groupoid import GroupoidMap, diagonal, point, product
from .sheafcalc import (BaseMismatch, Bundle, BundleMap, RanBundle, cochains_map,
                        cochains_triangle, identity_bundle_map, pullback_map, pullback_shriek,
                        pushforward_map, tensor_maps, tensor_shriek, trivial_bundle, verdier_dual)


class FootMismatch(ValueError):
    pass


class AdjointMissing(ValueError):
    pass


class Kernel:
    def __init__(self, left, right, bundle, name=None):
        P = product(left, right)
        if bundle.base != P:
            raise BaseMismatch("kernel payload must live on the product of its feet")
        self.left = left
        self.right = right
        self.bundle = bundle
        self.name = name or bundle.name

    @property
    def base(self):
        return self.bundle.base

    def point(self, a, b):
        """Index of (a, b) in the product carrier (a, b are indices)."""
        return a * self.right.m + b

    def dim(self, a, b):
        return self.bundle.dim(self.point(a, b))

    def dim_matrix(self):
        return [[self.dim(a, b) for b in range(self.right.m)] for a in range(self.left.m)]

    def __repr__(self):
        return f"Kernel({self.name}: {self.left.name} -> {self.right.name})"


def kernel_from_dims(X1, X2, dims, name=None):
    """Kernel between discrete groupoids with stalk dimensions dims[a][b]."""
    P = product(X1, X2)
    flat = [dims[a][b] for a in range(X1.m) for b in range(X2.m)]
    return Kernel(X1, X2, trivial_like(P, flat), name)


def trivial_like(P, dims):
    return Bundle(P, list(dims), None)


class KernelMap:
    """A 2-morphism: an equivariant bundle map between kernels with the same feet."""

    def __init__(self, source, target, phi, name=None):
        self.source = source
        self.target = target
        self.phi = phi
        self.name = name or phi.name

    def at(self, a, b):
        return self.phi.at(self.source.point(a, b))

    def then(self, other):
        return KernelMap(self.source, other.target, self.phi.then(other.phi), f"{other.name}.{self.name}")

    def inverse(self):
        return KernelMap(self.target, self.source, self.phi.inverse(), f"{self.name}^-1")

    def is_iso(self):
        return self.phi.is_iso()

    def equals(self, other):
        return self.phi.equals(other.phi)

    def is_identity(self):
        return self.phi.is_identity()

    def __repr__(self):
        return f"KernelMap({self.name}: {self.source.name} => {self.target.name})"


def kernel_identity_map(K):
    return KernelMap(K, K, identity_bundle_map(K.bundle), "id")


# --------------------------------------------------------------- products

class _Triple:
    """Y1 x Y2 x Y3 with its three pair projections (index arithmetic)."""

    def __init__(self, Y1, Y2, Y3):
        self.Ys = (Y1, Y2, Y3)
        P12, P23, P13 = product(Y1, Y2), product(Y2, Y3), product(Y1, Y3)
        T = product(P12, Y3)
        n2, n3 = Y2.group.n, Y3.group.n
        m2, m3 = Y2.m, Y3.m
        G = T.group.n
        self.T = T
        self.p12 = GroupoidMap(T, P12, [k // n3 for k in range(G)], [z // m3 for z in range(T.m)],
                               "p12", check=False)
        self.p23 = GroupoidMap(T, P23, [((k // n3) % n2) * n3 + k % n3 for k in range(G)],
                               [((z // m3) % m2) * m3 + z % m3 for z in range(T.m)], "p23", check=False)
        self.p13 = GroupoidMap(T, P13, [(k // (n2 * n3)) * n3 + k % n3 for k in range(G)],
                               [(z // (m2 * m3)) * m3 + z % m3 for z in range(T.m)], "p13", check=False)

    def point(self, a, b, c):
        Y1, Y2, Y3 = self.Ys
        return (a * Y2.m + b) * Y3.m + c

    @property
    def e13(self):
        Y1, _, Y3 = self.Ys
        return Y1.group.e * Y3.group.n + Y3.group.e


@lru_cache(maxsize=256)
def triple(Y1, Y2, Y3):
    return _Triple(Y1, Y2, Y3)


class _Quad:
    def __init__(self, Y1, Y2, Y3, Y4):
        self.Ys = (Y1, Y2, Y3, Y4)
        T = product(product(product(Y1, Y2), Y3), Y4)
        ns = [Y.group.n for Y in self.Ys]
        ms = [Y.m for Y in self.Ys]
        self.T = T

        def split(k, sizes):
            out = []
            for s in reversed(sizes):
                out.append(k % s)
                k //= s
            return out[::-1]

        def pairmap(i, j, name):
            P = product(self.Ys[i], self.Ys[j])
            th, u = [], []
            for k in range(T.group.n):
                g = split(k, ns)
                th.append(g[i] * ns[j] + g[j])
            for z in range(T.m):
                x = split(z, ms)
                u.append(x[i] * ms[j] + x[j])
            return GroupoidMap(T, P, th, u, name, check=False)

        self.p12 = pairmap(0, 1, "p12")
        self.p23 = pairmap(1, 2, "p23")
        self.p34 = pairmap(2, 3, "p34")
        self.p14 = pairmap(0, 3, "p14")
        self.ms = ms

    def point(self, a, b, c, d):
        m = self.ms
        return ((a * m[1] + b) * m[2] + c) * m[3] + d


@lru_cache(maxsize=64)
def quad(Y1, Y2, Y3, Y4):
    return _Quad(Y1, Y2, Y3, Y4)


# ------------------------------------------------------------ convolution

def _conv_payload(A, B):
    t = triple(A.left, A.right, B.right)
    W = tensor_shriek(pullback_shriek(t.p12, A.bundle), pullback_shriek(t.p23, B.bundle))
    return t, W


def convolve(K12, K23):
    """(p13)_*(p12^! K12 (x) p23^! K23): first K12, then K23."""
    if K12.right != K23.left:
        raise FootMismatch(f"cannot convolve {K12.name} with {K23.name}: right foot of the first "
                           f"is not the left foot of the second")
    t, W = _conv_payload(K12, K23)
    R = RanBundle(t.p13, W)
    K = Kernel(K12.left, K23.right, R, name=f"{K12.name}*{K23.name}")
    K.factors = (K12, K23)
    K.triple = t
    return K


def act(K, V):
    """(p2)_*(p1^! V (x) K)"""
    if V.base != K.left:
        raise BaseMismatch(f"act: bundle lives on {V.base.name}, kernel starts at {K.left.name}")
    t = triple(point(), K.left, K.right)
    # view V as a kernel from the point and convolve; then read off the right foot
    P = product(point(), K.left)
    Vk = Kernel(point(), K.left, Bundle(P, V.dim, lambda g, x: V.rho(g % K.left.group.n, x),
                                        V.labels, V.name))
    C = convolve(Vk, K)
    n = K.right.group.n
    R = C.bundle
    out = Bundle(K.right, R.dim, lambda g, x: R.rho(g % n, x), R.labels, name=f"[{K.name}]{V.name}")
    out.column = C
    return out


def column_kernel(V):
    """A bundle on Y viewed as a kernel pt -> Y."""
    Y = V.base
    P = product(point(), Y)
    n = Y.group.n
    return Kernel(point(), Y, Bundle(P, V.dim, lambda g, x: V.rho(g % n, x), V.labels, V.name),
                  name=V.name)


def identity_kernel(Y):
    """Delta_*(1); the stalk at (a, a') has basis {k : k.a' = a}, labeled by k."""
    P = product(Y, Y)
    d = diagonal(Y, P)
    R = RanBundle(d, trivial_bundle(Y))
    G = Y.group
    n = G.n

    def labels(z):
        F = R.fiber(z)
        out = []
        for (x, h) in F.reps:
            h1, h2 = divmod(h, n)
            out.append(G.labels[G.mul(G.inv(h1), h2)])
        return tuple(out)
    R._labels_fn = labels
    K = Kernel(Y, Y, R, name=f"I_{Y.name}")
    K.diag = d
    return K


def _identity_eval_row(I, y):
    """Row vector evaluating I(y, y) at the diagonal point (y, (e, e))."""
    Y = I.left
    e = Y.group.e * Y.group.n + Y.group.e
    return I.bundle.eval_matrix(I.point(y, y), (y, e))


def identity_coord_row(I, a, b, k):
    """Row vector reading the coefficient of k (k.b = a) in I(a, b)."""
    Y = I.left
    G = Y.group
    return I.bundle.eval_matrix(I.point(a, b), (a, G.e * G.n + k))


# ------------------------------------------------------------ unitors etc.

def left_unitor(K, IK=None):
    """lambda: I * K -> K"""
    Y1 = K.left
    I = identity_kernel(Y1) if IK is None else IK.factors[0]
    IK = IK or convolve(I, K)
    t = IK.triple
    m3 = K.right.m

    def at(w):
        y1, y3 = divmod(w, m3)
        E = IK.bundle.eval_matrix(w, (t.point(y1, y1, y3), t.e13))
        row = _identity_eval_row(I, y1)
        dk = K.bundle.dim(w)
        return la.matmul(la.kron(row, la.identity(dk)), E, IK.bundle.dim(w))
    return KernelMap(IK, K, BundleMap(IK.bundle, K.bundle, at, "lambda"))


def right_unitor(K, KI=None):
    """rho: K * I -> K"""
    Y3 = K.right
    I = identity_kernel(Y3) if KI is None else KI.factors[1]
    KI = KI or convolve(K, I)
    t = KI.triple
    m3 = Y3.m

    def at(w):
        y1, y3 = divmod(w, m3)
        E = KI.bundle.eval_matrix(w, (t.point(y1, y3, y3), t.e13))
        row = _identity_eval_row(I, y3)
        dk = K.bundle.dim(w)
        return la.matmul(la.kron(la.identity(dk), row), E, KI.bundle.dim(w))
    return KernelMap(KI, K, BundleMap(KI.bundle, K.bundle, at, "rho"))


def _to_quad_left(ABC, Q):
    """(A*B)*C -> Q = p14_*(A (x) B (x) C)."""
    AB, C = ABC.factors
    tl = ABC.triple
    tab = AB.triple
    q = Q.quad
    Y4 = C.right

    def at(w):
        F = Q.fiber(w)
        n = ABC.bundle.dim(w)
        reps = []
        for (z, h) in F.reps:
            a, b, c, d = _split4(q, z)
            E = ABC.bundle.eval_matrix(w, (tl.point(a, c, d), h))
            inner = AB.bundle.eval_matrix(AB.point(a, c), (tab.point(a, b, c), tab.e13))
            reps.append(la.matmul(la.kron(inner, la.identity(C.dim(c, d))), E, n))
        return Q.coords_matrix(w, reps, n)
    return at


def _to_quad_right(ABC, Q):
    """A*(B*C) -> Q."""
    A, BC = ABC.factors
    tr = ABC.triple
    tbc = BC.triple
    q = Q.quad

    def at(w):
        F = Q.fiber(w)
        n = ABC.bundle.dim(w)
        reps = []
        for (z, h) in F.reps:
            a, b, c, d = _split4(q, z)
            E = ABC.bundle.eval_matrix(w, (tr.point(a, b, d), h))
            inner = BC.bundle.eval_matrix(BC.point(b, d), (tbc.point(b, c, d), tbc.e13))
            reps.append(la.matmul(la.kron(la.identity(A.dim(a, b)), inner), E, n))
        return Q.coords_matrix(w, reps, n)
    return at


def _split4(q, z):
    m = q.ms
    d = z % m[3]
    z //= m[3]
    c = z % m[2]
    z //= m[2]
    return z // m[1], z % m[1], c, d


def _quad_bundle(A, B, C):
    q = quad(A.left, A.right, B.right, C.right)
    W = tensor_shriek(tensor_shriek(pullback_shriek(q.p12, A.bundle), pullback_shriek(q.p23, B.bundle)),
                      pullback_shriek(q.p34, C.bundle))
    Q = RanBundle(q.p14, W)
    Q.quad = q
    return Q


def associator(A, B, C, left=None, right=None):
    """(A*B)*C -> A*(B*C)"""
    L = left or convolve(convolve(A, B), C)
    R = right or convolve(A, convolve(B, C))
    Q = _quad_bundle(A, B, C)
    fl = _to_quad_left(L, Q)
    fr = _to_quad_right(R, Q)

    def at(w):
        Mr = la.inverse(fr(w)) if L.bundle.dim(w) else []
        if Mr is None:
            raise ArithmeticError("associator comparison is not invertible")
        return la.matmul(Mr, fl(w), L.bundle.dim(w))
    return KernelMap(L, R, BundleMap(L.bundle, R.bundle, at, "assoc"))


def whisker_right(phi, K, source=None, target=None):
    """phi * K for phi: A -> A'."""
    S = source or convolve(phi.source, K)
    T = target or convolve(phi.target, K)
    t = S.triple
    m = tensor_maps(pullback_map(t.p12, phi.phi), identity_bundle_map(pullback_shriek(t.p23, K.bundle)))
    m = BundleMap(S.bundle.V, T.bundle.V, m.at)
    return KernelMap(S, T, pushforward_map(t.p13, m, S.bundle, T.bundle), f"{phi.name}*id")


def whisker_left(K, phi, source=None, target=None):
    """K * phi for phi: B -> B'."""
    S = source or convolve(K, phi.source)
    T = target or convolve(K, phi.target)
    t = S.triple
    m = tensor_maps(identity_bundle_map(pullback_shriek(t.p12, K.bundle)), pullback_map(t.p23, phi.phi))
    m = BundleMap(S.bundle.V, T.bundle.V, m.at)
    return KernelMap(S, T, pushforward_map(t.p13, m, S.bundle, T.bundle), f"id*{phi.name}")


# ---------------------------------------------------------------- traces

def _diag_pullback(K, Y):
    return pullback_shriek(diagonal(Y, product(Y, Y)), K.bundle)


def trace_lt_ag(K):
    """C(Y, Delta^! K). A level-0 kernel (Matrix over a discrete set) gives
    the sum of its diagonal."""
    if isinstance(K, Matrix):
        return _matrix_trace(K)
    if K.left != K.right:
        raise FootMismatch("trace needs an endomorphism kernel")
    return cochains_triangle(K.left, _diag_pullback(K, K.left))


def trace_via_duality(K):
    """unit, then id (x) [K], then counit: C(Y, Delta^!(I * K))."""
    if isinstance(K, Matrix):
        I = Matrix.identity(K.rows, K.coeff)
        from .coeff import mat_mul
        return _matrix_trace(mat_mul(I, K))
    if K.left != K.right:
        raise FootMismatch("trace needs an endomorphism kernel")
    IK = convolve(identity_kernel(K.left), K)
    sp = cochains_triangle(K.left, _diag_pullback(IK, K.left))
    sp.kernel = IK
    return sp


def _matrix_trace(M):
    if M.rows != M.cols:
        raise FootMismatch("trace needs a square kernel")
    return M.coeff.sum(M.entries[i][i] for i in range(len(M.rows)))


def lt_ag_matrix(K, via=None, lt=None):
    """The comparison C(Delta^! lambda): trace_via_duality(K) -> trace_lt_ag(K)."""
    via = via or trace_via_duality(K)
    lt = lt or trace_lt_ag(K)
    lam = left_unitor(K, via.kernel)
    Y = K.left
    phi = pullback_map(diagonal(Y, product(Y, Y)), lam.phi)
    phi = BundleMap(via.ran.V, lt.ran.V, phi.at)
    return cochains_map(phi, via, lt)


def trace_comparison(K):
    via = trace_via_duality(K)
    lt = trace_lt_ag(K)
    M = lt_ag_matrix(K, via, lt)
    ok = via.dim == lt.dim and (via.dim == 0 or la.rank(M) == via.dim)
    return via, lt, M, ok


class DualityData:
    """Self-duality of Shv(Y): unit = identity kernel, counit(K) = C(Y, Delta^! K)."""

    def __init__(self, Y):
        self.Y = Y
        self.unit = identity_kernel(Y)
        II = convolve(self.unit, self.unit)
        lam = left_unitor(self.unit, II)
        rho = right_unitor(self.unit, II)
        # the zig-zag composite is the unitor on I*I; both readings must agree
        # and be invertible
        if not (lam.is_iso() and rho.is_iso() and lam.equals(rho)):
            raise ArithmeticError(f"zig-zag identities fail for {Y.name}")
        self.zigzag = lam

    def counit(self, K):
        return trace_lt_ag(K)


def duality_data(Y):
    return DualityData(Y)


def dual_pairing(K):
    """Pairing between the trace of K and the trace of its Verdier dual."""
    from .sheafcalc import verdier_pairing
    return verdier_pairing(_diag_pullback(K, K.left))


# ---------------------------------------------------------------- adjoints

def swap_kernel(K, bundle=None):
    """Transpose the feet of a kernel (optionally of a different payload on Y1 x Y2)."""
    from .groupoid import swap_map
    V = bundle or K.bundle
    s = swap_map(K.right, K.left, product(K.right, K.left), product(K.left, K.right))
    return Kernel(K.right, K.left, pullback_shriek(s, V), name=f"{K.name}^T")


def dual_kernel(K):
    """swap^!(D K): the candidate right (and left) adjoint."""
    R = swap_kernel(K, verdier_dual(K.bundle))
    R.name = f"{K.name}^R"
    return R


class Adjunction:
    def __init__(self, K, KR, unit, counit):
        self.K, self.KR, self.unit, self.counit = K, KR, unit, counit

    def __iter__(self):
        return iter((self.KR, self.unit, self.counit))


def adjunction_maps(K, KR=None, unit_scale=None, counit_scale=1):
    """Explicit u: I -> K * K^R and co-u: K^R * K -> I."""
    Y1, Y2 = K.left, K.right
    KR = KR or dual_kernel(K)
    G1, G2 = Y1.group, Y2.group
    c = unit_scale if unit_scale is not None else la.normalize(__import__("fractions").Fraction(1, G1.n))
    I1 = identity_kernel(Y1)
    I2 = identity_kernel(Y2)
    KKR = convolve(K, KR)
    KRK = convolve(KR, K)
    t1 = KKR.triple
    t2 = KRK.triple
    n1, n2 = G1.n, G2.n

    def u_at(w):
        a, a2 = divmod(w, Y1.m)
        F = KKR.bundle.fiber(w)
        dimI = I1.bundle.dim(w)
        ks = [k for k in range(n1) if Y1.act[k][a2] == a]
        rows = {k: identity_coord_row(I1, a, a2, k) for k in ks}
        reps = []
        for (z, h) in F.reps:
            h1, h3 = divmod(h, n1)
            x1b, x3 = divmod(z, Y1.m)
            x1, b = divmod(x1b, Y2.m)
            d1, d2 = K.dim(x1, b), K.dim(x3, b)
            M = la.zeros(d1 * d2, dimI)
            for k in ks:
                g = G1.prod(h1, k, G1.inv(h3))
                R = K.bundle.rho(g * n2 + G2.e, K.point(x3, b))
                vec = [R[i][j] for i in range(d1) for j in range(d2)]
                row = rows[k][0]
                for i, v in enumerate(vec):
                    if v:
                        Mi = M[i]
                        for j, r in enumerate(row):
                            if r:
                                Mi[j] = la.normalize(Mi[j] + c * v * r)
            reps.append(M)
        return KKR.bundle.coords_matrix(w, reps, dimI)

    def cu_at(w):
        b, b2 = divmod(w, Y2.m)
        F = I2.bundle.fiber(w)
        n = KRK.bundle.dim(w)
        reps = []
        for (x, h) in F.reps:
            h1, h2 = divmod(h, n2)
            k = G2.mul(G2.inv(h1), h2)
            row = [0] * n
            for a in range(Y1.m):
                d = K.dim(a, b)
                if d == 0:
                    continue
                E = KRK.bundle.eval_matrix(w, (t2.point(b, a, b2), t2.e13))
                R = K.bundle.rho(G1.e * n2 + k, K.point(a, b2))
                # contract K(a,b)^* with rho(e,k) applied to K(a,b')
                d2 = K.dim(a, b2)
                for i in range(d):
                    for j in range(d2):
                        r = R[i][j]
                        if r:
                            src = E[i * d2 + j]
                            for col in range(n):
                                if src[col]:
                                    row[col] = la.normalize(row[col] + counit_scale * r * src[col])
            reps.append([row])
        return I2.bundle.coords_matrix(w, reps, n)

    u = KernelMap(I1, KKR, BundleMap(I1.bundle, KKR.bundle, u_at, "u"))
    cu = KernelMap(KRK, I2, BundleMap(KRK.bundle, I2.bundle, cu_at, "co-u"))
    return KR, u, cu


def triangle_maps(K, KR, u, cu):
    """The two zig-zag composites K -> K and K^R -> K^R."""
    I1, KKR = u.source, u.target
    KRK, I2 = cu.source, cu.target
    # K -> I*K -> (K*KR)*K -> K*(KR*K) -> K*I -> K
    IK = convolve(I1, K)
    lam = left_unitor(K, IK)
    s1 = whisker_right(u, K, IK)
    a1 = associator(K, KR, K, left=s1.target)
    s2 = whisker_left(K, cu, a1.target)
    rho = right_unitor(K, s2.target)
    T1 = lam.inverse().then(s1).then(a1).then(s2).then(rho)
    # KR -> KR*I -> KR*(K*KR) -> (KR*K)*KR -> I*KR -> KR
    KRI = convolve(KR, I1)
    rho2 = right_unitor(KR, KRI)
    s3 = whisker_left(KR, u, KRI)
    a2 = associator(KR, K, KR, right=s3.target)
    s4 = whisker_right(cu, KR, a2.source)
    lam2 = left_unitor(KR, s4.target)
    T2 = rho2.inverse().then(s3).then(a2.inverse()).then(s4).then(lam2)
    return T1, T2


def kernel_right_adjoint(K, check=True):
    """(K^R, u, co-u) with K^R = swap^!(D K), or None with ``last_diagnostic`` set."""
    KR, u, cu = adjunction_maps(K)
    if check:
        T1, T2 = triangle_maps(K, KR, u, cu)
        if not T1.is_identity():
            kernel_right_adjoint.last_diagnostic = f"first triangle identity fails for {K.name}"
            return None
        if not T2.is_identity():
            kernel_right_adjoint.last_diagnostic = f"second triangle identity fails for {K.name}"
            return None
    kernel_right_adjoint.last_diagnostic = None
    return Adjunction(K, KR, u, cu)


kernel_right_adjoint.last_diagnostic = None


# ----------------------------------------------------------------- classes

def _as_kernel_map(alpha, G, K):
    """alpha: G -> act(K, G) as a 2-morphism Gcol => Gcol * K."""
    A = alpha.target
    if not hasattr(A, "column"):
        raise BaseMismatch("alpha must land in a bundle produced by act(K, G)")
    col = A.column
    if col.factors[1] is not K and col.factors[1].bundle is not K.bundle:
        raise BaseMismatch("alpha lands in act of a different kernel")
    Gcol = col.factors[0]
    return Gcol, KernelMap(Gcol, col, BundleMap(Gcol.bundle, col.bundle, alpha.at, alpha.name))


def _identity_family(GRG):
    """The section y |-> id_{G_y} of Delta^!(G^R * Gcol), as stalk coordinates."""
    Y = GRG.left
    t = GRG.triple
    out = {}
    for y in range(Y.m):
        w = GRG.point(y, y)
        d = GRG.factors[1].dim(0, y)
        v = [[1 if i == j else 0] for i in range(d) for j in range(d)]
        F = GRG.bundle.fiber(w)
        # one free component; the representative is ((y, *, y), e)
        assert len(F.reps) == 1 and F.reps[0] == (t.point(y, 0, y), t.e13)
        out[y] = GRG.bundle.coords_matrix(w, [v], 1)
    return out


def class_of(G, alpha, K):
    """cl(G, alpha) in trace_lt_ag(K), as a coordinate vector.

    Phi = lambda . (co-u * K) . assoc^-1 . (id * alpha): G^R * G => K, then
    C(Delta^! Phi) applied to the identity family in Tr(G^R * G) = End(G)."""
    if K.left != K.right:
        raise FootMismatch("class_of needs an endomorphism kernel")
    if G.base != K.left:
        raise BaseMismatch("G must live on the feet of K")
    Gcol, ak = _as_kernel_map(alpha, G, K)
    adj = kernel_right_adjoint(Gcol, check=False)
    if adj is None:
        raise AdjointMissing(f"column kernel of {G.name} has no right adjoint")
    GR, u, cu = adj
    GRG = cu.source
    wl = whisker_left(GR, ak)
    L = convolve(GRG, K)
    a = associator(GR, Gcol, K, left=L, right=wl.target)
    wr = whisker_right(cu, K, L)
    lam = left_unitor(K, wr.target)
    Phi = wl.then(a.inverse()).then(wr).then(lam)
    fam = _identity_family(GRG)
    lt = trace_lt_ag(K)
    Y = K.left
    R = lt.ran
    F = R.fiber(0)
    reps = [la.matmul(Phi.at(x, x), fam[x], 1) for (x, _) in F.reps]
    col = R.coords_matrix(0, reps, 1)
    return [r[0] for r in col]


def class_direct(G, alpha, K):
    """Partial trace of alpha evaluated at the diagonal comma point; an
    independent route to class_of used as an oracle."""
    A = alpha.target
    col = A.column
    t = col.triple
    lt = trace_lt_ag(K)
    R = lt.ran
    reps = []
    for (x, _) in R.fiber(0).reps:
        d = G.dim(x)
        E = col.bundle.eval_matrix(x, (t.point(0, x, x), t.e13))
        M = la.matmul(E, alpha.at(x), d)
        k = K.dim(x, x)
        v = [sum(M[i * k + j][i] for i in range(d)) for j in range(k)]
        reps.append([[la.normalize(c)] for c in v])
    return [r[0] for r in R.coords_matrix(0, reps, 1)]


# ----------------------------------------------------------- functoriality

def _tr_map(phi, source=None, target=None):
    """Tr of a 2-morphism between endo-kernels: C(Delta^! phi)."""
    Y = phi.source.left
    S = source or trace_lt_ag(phi.source)
    T = target or trace_lt_ag(phi.target)
    d = diagonal(Y, product(Y, Y))
    m = pullback_map(d, phi.phi)
    m = BundleMap(S.ran.V, T.ran.V, m.at)
    return cochains_map(m, S, T)


def _loop_values(AB, flip=False):
    """Matrix from C(Y1, Delta^!(A*B)) to invariant sections of A(a,b) (x) B(b,a) on Y1 x Y2."""
    A, B = AB.factors
    Y1, Y2 = A.left, A.right
    t = AB.triple
    tr = trace_lt_ag(AB)
    loop = tensor_shriek(A.bundle, swap_kernel(B).bundle) if not flip else \
        tensor_shriek(swap_kernel(B).bundle, A.bundle)
    S = cochains_triangle(product(Y1, Y2), loop)
    n = tr.dim
    reps = []
    for (z, _) in S.ran.fiber(0).reps:
        a, b = divmod(z, Y2.m)
        E0 = tr.ran.eval_matrix(0, (a, 0))
        E = AB.bundle.eval_matrix(AB.point(a, a), (t.point(a, b, a), t.e13))
        reps.append(la.matmul(E, E0, n))
    return tr, S, S.ran.coords_matrix(0, reps, n)


def _commutation(d1, d2):
    """Matrix of x (x) y |-> y (x) x on k^d1 (x) k^d2."""
    P = la.zeros(d1 * d2, d1 * d2)
    for i in range(d1):
        for j in range(d2):
            P[j * d1 + i][i * d2 + j] = 1
    return P


def cyclic_map(AB, BA):
    """Tr(A * B) -> Tr(B * A) for A: Y1 -> Y2, B: Y2 -> Y1."""
    A, B = AB.factors
    tr1, S1, M1 = _loop_values(AB)
    tr2, S2, M2 = _loop_values(BA)
    # S2 lives on Y2 x Y1 with stalks B(b,a) (x) A(a,b); move it to S1
    Y1, Y2 = A.left, A.right
    n2 = tr2.dim
    reps = []
    for (z, _) in S1.ran.fiber(0).reps:
        a, b = divmod(z, Y2.m)
        E = S2.ran.eval_matrix(0, (b * Y1.m + a, 0))
        P = _commutation(B.dim(b, a), A.dim(a, b))
        reps.append(la.matmul(P, la.matmul(E, M2, n2) if n2 else E, n2))
    M2b = S1.ran.coords_matrix(0, reps, n2)
    if tr1.dim != tr2.dim:
        raise ArithmeticError("cyclicity: trace spaces of different dimension")
    inv = la.inverse(M2b) if n2 else []
    if inv is None:
        raise ArithmeticError("cyclicity comparison is not invertible")
    return la.matmul(inv, M1, tr1.dim) if n2 else []


def trace_functoriality(H, alpha, adjunction=None):
    """Tr(F1) -> Tr(F2) induced by H: Y1 -> Y2 (with right adjoint) and
    alpha: F1 * H => H * F2, as a matrix between trace_lt_ag spaces."""
    FH, HF = alpha.source, alpha.target
    F1, H1 = FH.factors
    H2, F2 = HF.factors
    if H1.bundle is not H.bundle and H1.dim_matrix() != H.dim_matrix():
        raise BaseMismatch("alpha must start at convolve(F1, H)")
    if H2.bundle is not H.bundle and H2.dim_matrix() != H.dim_matrix():
        raise BaseMismatch("alpha must end at convolve(H, F2)")
    adj = adjunction or kernel_right_adjoint(H, check=False)
    if adj is None:
        raise AdjointMissing(f"{H.name} has no right adjoint")
    HR, u, cu = adj
    HHR, HRH = u.target, cu.source
    # (1) F1 -> F1 * (H * HR)
    F1I = convolve(F1, u.source)
    s1 = right_unitor(F1, F1I).inverse().then(whisker_left(F1, u, F1I))
    # (2) F1 * (H * HR) -> (F1 * H) * HR -> (H * F2) * HR -> H * (F2 * HR)
    FHxHR = convolve(FH, HR)
    a1 = associator(F1, H, HR, left=FHxHR, right=s1.target).inverse()
    w = whisker_right(alpha, HR, FHxHR)
    a2 = associator(H, F2, HR, left=w.target)
    s2 = a1.then(w).then(a2)
    # (3) cyclicity, then (F2 * HR) * H -> F2 * (HR * H) -> F2 * I -> F2
    F2HR = a2.target.factors[1]
    loop = convolve(F2HR, H)
    c = cyclic_map(a2.target, loop)
    a3 = associator(F2, HR, H, left=loop)
    wc = whisker_left(F2, cu, a3.target)
    s3 = a3.then(wc).then(right_unitor(F2, wc.target))
    T1 = trace_lt_ag(F1)
    M1 = _tr_map(s1, T1, trace_lt_ag(s1.target))
    M2 = _tr_map(s2)
    M3 = _tr_map(s3, None, trace_lt_ag(F2))
    out = M1
    for M, n in ((M2, None), (c, None), (M3, None)):
        out = la.matmul(M, out, T1.dim)
    return out


# ------------------------------------------------------------ Beck-Chevalley

class BCSquare:
    """A --f--> B
       |p       |g
       C --q--> D   with a 2-cell gamma: f * g => p * q."""

    def __init__(self, f, g, p, q, gamma=None, name=None):
        self.f, self.g, self.p, self.q = f, g, p, q
        self.gamma = gamma
        self.name = name or "square"

    def edges(self):
        return {"f": self.f, "g": self.g, "p": self.p, "q": self.q}


def _edge_kernel(E, name):
    if isinstance(E, Kernel):
        return E
    if isinstance(E, Matrix):
        from .groupoid import discrete
        ok = isinstance(E.coeff, RationalField) and all(
            v == int(v) and v >= 0 for row in E.entries for v in row)
        if not ok:
            raise AdjointMissing(f"edge {name} is a linear map with no kernel realization, "
                                 f"so it has no adjoint")
        X1, X2 = discrete(list(E.rows)), discrete(list(E.cols))
        return kernel_from_dims(X1, X2, [[int(v) for v in row] for row in E.entries], name)
    raise TypeError(f"edge {name} must be a Kernel or a Matrix")


def _mate(X, Y, Z, W, gamma, u, cu, P, Q):
    """X * Y => Q * W from gamma: Y * Z => P * Q, u: I => Z * W, cu: X * P => I.

    X*Y -> (X*Y)*I -> (X*Y)*(Z*W) -> ((X*Y)*Z)*W -> (X*(Y*Z))*W
        -> (X*(P*Q))*W -> ((X*P)*Q)*W -> (I*Q)*W -> Q*W
    """
    XY = convolve(X, Y)
    XYI = convolve(XY, u.source)
    m = right_unitor(XY, XYI).inverse()
    m = m.then(whisker_left(XY, u, XYI))
    a = associator(XY, Z, W, right=m.target).inverse()
    m = m.then(a)
    XYZ = a.target.factors[0]
    b = associator(X, Y, Z, left=XYZ)
    m = m.then(whisker_right(b, W, a.target))
    c = whisker_left(X, gamma, b.target)
    m = m.then(whisker_right(c, W))
    d = associator(X, P, Q, right=c.target).inverse()
    m = m.then(whisker_right(d, W))
    XPQ = d.target
    e = whisker_right(cu, Q, XPQ)
    m = m.then(whisker_right(e, W))
    lam = left_unitor(Q, e.target)
    m = m.then(whisker_right(lam, W))
    return m


def mate(square, side="right"):
    """The mate 2-morphism of the square.

    right: p^R * f => q * g^R, built from u_g and co-u_p.
    left:  the right mate of the transposed square (f, q vertical) with gamma^-1,
           i.e. f^R * p => g * q^R."""
    e = {k: _edge_kernel(v, k) for k, v in square.edges().items()}
    f, g, p, q = e["f"], e["g"], e["p"], e["q"]
    gamma = square.gamma
    fg, pq = convolve(f, g), convolve(p, q)
    if gamma is None:
        gamma = KernelMap(fg, pq, identity_bundle_map(fg.bundle), "gamma")
    if side == "left":
        f, g, p, q = p, q, f, g
        gamma = gamma.inverse()
        names = ("f", "q")
    elif side == "right":
        names = ("p", "g")
    else:
        raise ValueError("side must be 'left' or 'right'")
    adj_p = kernel_right_adjoint(p)
    if adj_p is None:
        raise AdjointMissing(f"edge {names[0]} has no right adjoint: {kernel_right_adjoint.last_diagnostic}")
    adj_g = kernel_right_adjoint(g)
    if adj_g is None:
        raise AdjointMissing(f"edge {names[1]} has no right adjoint: {kernel_right_adjoint.last_diagnostic}")
    pR, _, cu = adj_p
    gR, u, _ = adj_g
    return _mate(pR, f, g, gR, gamma, u, cu, p, q)


def beck_chevalley_check(square, side="right"):
    """(ok, witness): ok iff the mate is invertible; the witness holds the mate
    matrices and the first failing stalk."""
    m = mate(square, side)
    S, T = m.source, m.target
    mats = {}
    bad = None
    for a in range(S.left.m):
        for b in range(S.right.m):
            M = m.at(a, b)
            mats[(S.left.carrier[a], S.right.carrier[b])] = M
            ds, dt = S.dim(a, b), T.dim(a, b)
            if bad is None and (ds != dt or (ds and la.rank(M) != ds)):
                bad = {"stalk": (S.left.carrier[a], S.right.carrier[b]), "dims": (ds, dt),
                       "rank": la.rank(M) if ds and dt else 0}
    return bad is None, {"mate": mats, "failure": bad}
