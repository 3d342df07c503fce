"""Weil sheaves, Frobenius traces and the sheaf-function dictionary.

A Frobenius here is an automorphism F = (theta, u) of Y = X//G. A Weil
structure on V is a map alpha: F^!V -> V, i.e. alpha_x : V_u(x) -> V_x with
alpha_gx rho(theta g)_u(x) = rho(g)_x alpha_x.

Twisted fixed points are pairs (x, g) with g.u(x) = x. The stalk of
Delta^! K_F at x has basis {k : k.x = u(x)}, and k corresponds to (x, k^-1).
"""
from fractions import Fraction

from . import linalg as la
from .coeff import RationalField
from .groupoid import GroupoidError, compose, graph, identity_map, product, twisted_fixed_points
from .kernelcalc import Kernel, act, class_of, convolve, identity_kernel, trace_lt_ag
from .sheafcalc import (BundleMap, EquivarianceError, Fn0, RanBundle, bundles_isomorphic, direct_sum,
                        pullback_shriek, tensor_shriek, trivial_bundle)

QQ = RationalField()


def _require_auto(Y, F):
    if F.dom != Y or F.cod != Y:
        raise GroupoidError(f"{F.name} is not an endomorphism of {Y.name}")
    if not F.is_iso():
        raise GroupoidError(f"Frobenius {F.name} must be invertible")


class WeilSheaf:
    def __init__(self, V, F, alpha, name=None, check=True):
        Y = V.base
        _require_auto(Y, F)
        self.V, self.F, self.Y = V, F, Y
        self.name = name or f"({V.name},alpha)"
        at = alpha.at if isinstance(alpha, BundleMap) else (alpha if callable(alpha) else tuple(alpha).__getitem__)
        self.alpha = BundleMap(pullback_shriek(F, V), V, at, "alpha")
        if check:
            self.validate()

    def validate(self):
        """Exhaustive equivariance of alpha against theta_F."""
        V, F, Y = self.V, self.F, self.Y
        G = Y.group
        for x in range(Y.m):
            M = self.alpha.at(x)
            du, dx = V.dim(F.u[x]), V.dim(x)
            if len(M) != dx or any(len(r) != du for r in M):
                raise EquivarianceError(f"alpha has the wrong shape at {Y.carrier[x]!r}")
        for g in range(G.n):
            for x in range(Y.m):
                gx = Y.act[g][x]
                lhs = la.matmul(self.alpha.at(gx), V.rho(F.theta[g], F.u[x]), V.dim(F.u[x]))
                rhs = la.matmul(V.rho(g, x), self.alpha.at(x), V.dim(F.u[x]))
                if lhs != rhs:
                    raise EquivarianceError(f"alpha is not equivariant at g={G.labels[g]!r}, "
                                            f"x={Y.carrier[x]!r}")
        return self

    def __repr__(self):
        return f"WeilSheaf({self.name} on {self.Y.name})"


def weil_tensor(W1, W2):
    if W1.F != W2.F:
        raise GroupoidError("tensor of Weil sheaves needs a common Frobenius")
    V = tensor_shriek(W1.V, W2.V)
    return WeilSheaf(V, W1.F, lambda x: la.kron(W1.alpha.at(x), W2.alpha.at(x)), check=False)


def weil_sum(W1, W2):
    if W1.F != W2.F:
        raise GroupoidError("sum of Weil sheaves needs a common Frobenius")
    V = direct_sum(W1.V, W2.V)
    u = W1.F.u

    def at(x):
        return la.direct_sum([(W1.alpha.at(x), W1.V.dim(x), W1.V.dim(u[x])),
                              (W2.alpha.at(x), W2.V.dim(x), W2.V.dim(u[x]))])
    return WeilSheaf(V, W1.F, at, check=False)


def weil_pushforward(f, W, F2):
    """f_* W for f: Y -> Y2 with the same group (theta_f = id), F2 f = f F
    strictly. Stalks are sums over fibers; alpha acts fiberwise."""
    Y, Y2 = f.dom, f.cod
    F = W.F
    if Y.group != Y2.group or list(f.theta) != list(range(Y.group.n)):
        raise GroupoidError("pushforward of Weil sheaves needs a same-group map")
    if list(F.theta) != list(F2.theta) or any(f.u[F.u[x]] != F2.u[f.u[x]] for x in range(Y.m)):
        raise GroupoidError("f must intertwine the two Frobenii")
    R = RanBundle(f, W.V)
    e = Y.group.e

    def at(y):
        # (F2^! f_*V)_y = (f_*V)_u2(y) -> (f_*V)_y
        src = F2.u[y]
        n = R.dim(src)
        Fy = R.fiber(y)
        reps = []
        for (x, h) in Fy.reps:
            assert h == e
            E = R.eval_matrix(src, (F.u[x], e))
            reps.append(la.matmul(W.alpha.at(x), E, n))
        return R.coords_matrix(y, reps, n)
    return WeilSheaf(R, F2, at, name=f"{f.name}_*{W.name}")


# -------------------------------------------------------------- kernels

def frobenius_kernel(Y, F):
    """(id, F)_* of the constant rank-1 bundle; the basis of K(a, c) is
    labeled by {k : k.c = u(a)}."""
    _require_auto(Y, F)
    P = product(Y, Y)
    gr = graph(F, P)
    R = RanBundle(gr, trivial_bundle(Y))
    G = Y.group
    n = G.n
    th = F.theta

    def labels(z):
        out = []
        for (x, h) in R.fiber(z).reps:
            h1, h2 = divmod(h, n)
            out.append(G.labels[G.mul(G.inv(th[h1]), h2)])
        return tuple(out)
    R._labels_fn = labels
    K = Kernel(Y, Y, R, name=f"K_{F.name}")
    K.frobenius = F
    return K


def _basis_k(K, x):
    """The k in K(x, x) for each basis vector of the cochain stalk at x."""
    Y = K.left
    G = Y.group
    n = G.n
    th = K.frobenius.theta
    R = K.bundle
    F = R.fiber(K.point(x, x))
    out = []
    for (p, h) in F.reps:
        h1, h2 = divmod(h, n)
        out.append(G.mul(G.inv(th[h1]), h2))
    return out


def tr_frob(Y, F, kernel=None):
    """trace_lt_ag of the Frobenius kernel, basis relabeled by classes of
    twisted fixed points."""
    K = kernel or frobenius_kernel(Y, F)
    sp = trace_lt_ag(K)
    fix = twisted_fixed_points(Y, F)
    G = Y.group
    R = sp.ran
    Fb = R.fiber(0)
    classes = []
    for c, (x, _) in enumerate(Fb.reps):
        ks = _basis_k(K, x)
        for j in Fb.free[c]:
            # row j of the Delta^!K stalk at x is the basis vector k
            k = ks[j]
            i = fix.index((Y.carrier[x], G.labels[G.inv(k)]))
            rep = fix.orbits[fix.orbit_of[i]][0]
            classes.append(fix.carrier[rep])
    sp.basis = tuple(classes)
    sp.fix = fix
    sp.kernel = K
    if len(set(classes)) != len(classes) or len(classes) != len(fix.orbits):
        raise ArithmeticError("trace basis does not match the twisted fixed-point classes")
    return sp


def lt_naive(t, space):
    """Read a trace vector as a function on twisted fixed-point classes."""
    vals = {cl: la.normalize(Fraction(v)) for cl, v in zip(space.basis, t)}
    return Fn0(space.fix, QQ, vals)


def sfunct(W):
    """(x, g) |-> tr(alpha_x rho(g^-1)_x), checked constant on classes."""
    Y, F, V = W.Y, W.F, W.V
    G = Y.group
    fix = twisted_fixed_points(Y, F)

    def value(label):
        xl, gl = label
        x, g = Y.index(xl), G.index(gl)
        gi = G.inv(g)
        M = la.matmul(W.alpha.at(x), V.rho(gi, x), V.dim(x))
        return la.normalize(Fraction(la.trace(M)) if M else Fraction(0))
    try:
        return Fn0.from_points(fix, QQ, value)
    except ValueError as exc:
        raise EquivarianceError(f"sfunct is not constant on twisted classes: {exc}") from None


def adjoint_weil_map(W, K=None):
    """alpha': V -> act(K_F, V), the adjunct of alpha."""
    Y, F, V = W.Y, W.F, W.V
    K = K or frobenius_kernel(Y, F)
    A = act(K, V)
    col = A.column
    t = col.triple
    G = Y.group
    n = G.n

    def at(c):
        R = col.bundle
        Fc = R.fiber(c)
        dv = V.dim(c)
        reps = []
        for (z, h) in Fc.reps:
            a, c2 = divmod(z % (Y.m * Y.m), Y.m)
            # h = (e, h2) with c2 = h2.c
            h2 = h % n
            vc = V.rho(h2, c)
            dk = K.dim(a, c2)
            KF = K.bundle.fiber(K.point(a, c2))
            M = la.zeros(V.dim(a) * dk, dv)
            for hp in range(n):
                if Y.act[hp][c2] != F.u[a]:
                    continue
                comp, _ = KF.where[(a, G.e * n + hp)]
                j = KF.offsets[comp]
                B = la.matmul(W.alpha.at(a), la.matmul(V.rho(hp, c2), vc, dv), dv)
                for i in range(V.dim(a)):
                    row = M[i * dk + j]
                    for col_ in range(dv):
                        row[col_] += B[i][col_]
            reps.append(M)
        return R.coords_matrix(c, reps, dv)
    return BundleMap(V, A, at, "alpha'")


def cl_weil(W, space=None):
    """cl(V, alpha) in tr_frob(Y, F), as a coordinate vector."""
    space = space or tr_frob(W.Y, W.F)
    K = space.kernel
    return class_of(W.V, adjoint_weil_map(W, K), K)


def frobenius_inverse_check(Y, F):
    """K_F * K_(F^-1) is isomorphic to the identity kernel."""
    Fi = F.inverse()
    C = convolve(frobenius_kernel(Y, F), frobenius_kernel(Y, Fi))
    I = identity_kernel(Y)
    return bundles_isomorphic(C.bundle, I.bundle)


# ------------------------------------------------------------ generators

def frobenius_power(F, k):
    out = identity_map(F.dom)
    for _ in range(k):
        out = compose(out, F)
    return out


def frobenius_order(F):
    Y = F.dom
    idm = identity_map(Y)
    P = F
    k = 1
    while list(P.theta) != list(idm.theta) or list(P.u) != list(idm.u):
        P = compose(P, F)
        k += 1
    return k


def induced_weil(V0, F, twist=None):
    """V = sum_i (F^i)^! V0 (i < order of F) with alpha the cyclic shift,
    optionally precomposed with an endomorphism ``twist`` of F^!V."""
    Y = V0.base
    L = frobenius_order(F)
    parts = [pullback_shriek(frobenius_power(F, i), V0) for i in range(L)]
    V = parts[0]
    for Pt in parts[1:]:
        V = direct_sum(V, Pt)
    u = F.u

    def shift(x):
        # (F^!V)_x = sum_j V0_{u^(j+1) x} -> V_x = sum_i V0_{u^i x}: block i-1 -> block i
        dims_src = [Pt.dim(u[x]) for Pt in parts]
        dims_tgt = [Pt.dim(x) for Pt in parts]
        M = la.zeros(sum(dims_tgt), sum(dims_src))
        so = [sum(dims_src[:i]) for i in range(L)]
        to = [sum(dims_tgt[:i]) for i in range(L)]
        for i in range(L):
            j = (i - 1) % L
            for r in range(dims_tgt[i]):
                M[to[i] + r][so[j] + r] = 1
        return M
    if twist is None:
        at = shift
    else:
        def at(x):
            return la.matmul(shift(x), twist.at(x), V.dim(u[x]))
    W = WeilSheaf(V, F, at, check=False)
    return W
