"""Sheaves on finite groupoids.

Level 0: functions on components (Fn0). Level 1/2: equivariant vector bundles
(Bundle) with exact rational matrices rho(g)_x : V_x -> V_{g.x}.

Right Kan extension along f: Y1 -> Y2 is computed over the iso-comma fiber
C_y = {(x, h) : u(x) = h.y}, on which G1 acts by g.(x, h) = (g.x, theta(g) h).
A section is an equivariant family s_(x,h) in V_x; it is determined by its
values at one representative per component, each of which must be fixed by
the stabilizer. Coordinates of a section are the entries of those values at
the free columns of the invariant basis.
"""
from functools import cached_property

from . import linalg as la
from .coeff import Matrix, RationalField, UnsupportedCoefficient, is_invertible
from .groupoid import GroupoidError, IsoCommaSquare, product, to_point


class BaseMismatch(ValueError):
    pass


class EquivarianceError(ValueError):
    pass


def _require_rational(coeff):
    if coeff is not None and not isinstance(coeff, RationalField):
        raise UnsupportedCoefficient(f"bundles are only supported over the rationals, not {coeff.name}")


# ------------------------------------------------------------------ level 0

class Fn0:
    """Coefficient-valued function on pi0(Y), keyed by orbit representative labels."""

    def __init__(self, base, coeff, values):
        self.base = base
        self.coeff = coeff
        reps = [base.carrier[r] for r, _, _ in base.orbits]
        values = dict(values)
        if set(values) != set(reps):
            raise ValueError("Fn0 must be defined on exactly the components of its base")
        self.values = {r: values[r] for r in reps}

    @classmethod
    def from_points(cls, base, coeff, fn):
        """Build from a function on objects; checks it is constant on orbits."""
        vals = {}
        for rep, members, _ in base.orbits:
            v = fn(base.carrier[rep])
            for y in members:
                if fn(base.carrier[y]) != v:
                    raise ValueError(f"not constant on the component of {base.carrier[rep]!r}")
            vals[base.carrier[rep]] = v
        return cls(base, coeff, vals)

    def __call__(self, label):
        x = self.base.index(label)
        rep = self.base.orbits[self.base.orbit_of[x]][0]
        return self.values[self.base.carrier[rep]]

    def __eq__(self, other):
        return isinstance(other, Fn0) and self.base == other.base and self.values == other.values

    def __repr__(self):
        return f"Fn0({self.values})"

    def items(self):
        return list(self.values.items())


# --------------------------------------------------------------- bundles

class Bundle:
    """Equivariant vector bundle on an action groupoid.

    ``dims`` is a sequence indexed by carrier position (or a callable);
    ``rho(g, x)`` returns the matrix of g at x (indices). Both are evaluated
    lazily and cached."""

    def __init__(self, base, dims, rho=None, labels=None, name=None):
        self.base = base
        self._dims = dims if callable(dims) else tuple(dims).__getitem__
        if not callable(dims) and len(dims) != base.m:
            raise ValueError("one dimension per object required")
        self._rho_fn = rho
        self._labels_fn = labels
        self._rho_cache = {}
        self._dim_cache = {}
        self.name = name or "V"

    def dim(self, x):
        d = self._dim_cache.get(x)
        if d is None:
            d = self._dim_cache[x] = self._dims(x)
        return d

    @property
    def dims(self):
        return tuple(self.dim(x) for x in range(self.base.m))

    def rho(self, g, x):
        key = (g, x)
        M = self._rho_cache.get(key)
        if M is None:
            if self._rho_fn is None:
                M = la.identity(self.dim(x))
            else:
                M = self._rho_fn(g, x)
            self._rho_cache[key] = M
        return M

    def labels(self, x):
        if self._labels_fn is None:
            return tuple(range(self.dim(x)))
        return tuple(self._labels_fn(x))

    def __repr__(self):
        return f"Bundle({self.name} on {self.base.name})"

    def validate(self, exhaustive=False):
        """Check rho(e) = 1 and rho(gh) = rho(g) rho(h).

        With exhaustive=False the law is checked for g in a generating set
        and all h, which implies it for all g by induction on word length."""
        Y = self.base
        G = Y.group
        for x in range(Y.m):
            if self.dim(Y.act[G.e][x]) != self.dim(x):
                raise EquivarianceError("dimension not constant along orbits")
            if self.rho(G.e, x) != la.identity(self.dim(x)):
                raise EquivarianceError(f"rho(e) != 1 at {Y.carrier[x]!r}")
        gens = range(G.n) if exhaustive else G.generators
        for g in gens:
            for h in range(G.n):
                gh = G.table[g][h]
                for x in range(Y.m):
                    hx = Y.act[h][x]
                    if self.dim(hx) != self.dim(x):
                        raise EquivarianceError("dimension not constant along orbits")
                    lhs = self.rho(gh, x)
                    rhs = la.matmul(self.rho(g, hx), self.rho(h, x), self.dim(x))
                    if lhs != rhs:
                        raise EquivarianceError(
                            f"rho(gh) != rho(g)rho(h) at g={G.labels[g]!r}, h={G.labels[h]!r}, "
                            f"x={Y.carrier[x]!r}")
        return self

    def relabel(self, labels):
        return Bundle(self.base, self._dims, self._rho_fn and self.rho, labels, self.name)

    def character(self, x):
        """Traces of the stabilizer of x acting on V_x."""
        return tuple(la.trace(self.rho(g, x)) for g in self.base.stabilizer(x))


def trivial_bundle(Y, d=1):
    return Bundle(Y, [d] * Y.m, None, name="1" if d == 1 else f"1^{d}")


def zero_bundle(Y):
    return Bundle(Y, [0] * Y.m, None, name="0")


def bundle_from_generators(Y, dims, gen_mats, labels=None, name=None):
    """Complete rho from matrices on generators.

    gen_mats maps (g, x) index pairs, for g in a generating set S and every x,
    to matrices. rho is extended along words and then validated."""
    G = Y.group
    gens = sorted({g for g, _ in gen_mats})
    if G.closure(gens) != frozenset(range(G.n)):
        raise ValueError(f"{name or 'bundle'}: supplied elements do not generate the group")
    for s in gens:
        for x in range(Y.m):
            if (s, x) not in gen_mats:
                raise ValueError(f"{name or 'bundle'}: missing matrix for "
                                 f"{G.labels[s]!r} at {Y.carrier[x]!r}")
            M = gen_mats[s, x]
            if len(M) != dims[Y.act[s][x]] or any(len(r) != dims[x] for r in M):
                raise ValueError(f"{name or 'bundle'}: matrix for {G.labels[s]!r} at "
                                 f"{Y.carrier[x]!r} has the wrong shape")
    table = {(G.e, x): la.identity(dims[x]) for x in range(Y.m)}
    reached = [G.e]
    seen = {G.e}
    while reached:
        g = reached.pop()
        for s in gens:
            sg = G.table[s][g]
            if sg in seen:
                continue
            seen.add(sg)
            reached.append(sg)
            for x in range(Y.m):
                table[sg, x] = la.matmul(gen_mats[s, Y.act[g][x]], table[g, x], dims[x])
    V = Bundle(Y, dims, lambda g, x: table[g, x], labels, name)
    V.validate()
    return V


def induced_bundle(Y, reps):
    """Bundle from stabilizer representations at orbit representatives.

    reps[k] = (d, sigma) for the k-th orbit where sigma(g) is a d x d matrix
    for g in the stabilizer of the representative."""
    trans = Y.transporter
    G = Y.group
    orbit_of = Y.orbit_of
    dims = [reps[orbit_of[x]][0] for x in range(Y.m)]

    def rho(g, x):
        y = Y.act[g][x]
        s = G.prod(G.inv(trans[y]), g, trans[x])
        return reps[orbit_of[x]][1](s)

    return Bundle(Y, dims, rho)


class BundleMap:
    """Equivariant map of bundles on a common base, evaluated lazily per point."""

    def __init__(self, source, target, at, name=None):
        if source.base != target.base:
            raise BaseMismatch("bundle map between bundles on different bases")
        self.source = source
        self.target = target
        self._at = at if callable(at) else tuple(at).__getitem__
        self._cache = {}
        self.name = name or "phi"

    def at(self, x):
        M = self._cache.get(x)
        if M is None:
            M = self._cache[x] = self._at(x)
        return M

    @classmethod
    def from_reps(cls, source, target, rep_mats, name=None):
        """Extend matrices given at orbit representatives by transport."""
        Y = source.base
        G = Y.group
        trans = Y.transporter
        orbit_of = Y.orbit_of

        def at(x):
            k = orbit_of[x]
            r = Y.orbits[k][0]
            g = trans[x]
            M = rep_mats[k]
            if g == G.e:
                return M
            return la.matmul(la.matmul(target.rho(g, r), M, source.dim(r)),
                             source.rho(G.inv(g), x), source.dim(x))
        return cls(source, target, at, name)

    def __repr__(self):
        return f"BundleMap({self.name}: {self.source.name} -> {self.target.name})"

    def validate(self):
        Y = self.source.base
        G = Y.group
        for x in range(Y.m):
            M = self.at(x)
            if len(M) != self.target.dim(x) or any(len(r) != self.source.dim(x) for r in M):
                raise EquivarianceError(f"{self.name}: wrong shape at {Y.carrier[x]!r}")
        for g in G.generators:
            for x in range(Y.m):
                gx = Y.act[g][x]
                lhs = la.matmul(self.target.rho(g, x), self.at(x), self.source.dim(x))
                rhs = la.matmul(self.at(gx), self.source.rho(g, x), self.source.dim(x))
                if lhs != rhs:
                    raise EquivarianceError(f"{self.name}: not equivariant at g={G.labels[g]!r}, "
                                            f"x={Y.carrier[x]!r}")
        return self

    def then(self, other):
        """other ∘ self"""
        if self.target is not other.source and self.target.dims != other.source.dims:
            raise BaseMismatch("composable maps need matching middle bundle")
        return BundleMap(self.source, other.target,
                         lambda x: la.matmul(other.at(x), self.at(x), self.source.dim(x)),
                         f"{other.name}.{self.name}")

    def inverse(self):
        def at(x):
            M = la.inverse(self.at(x)) if self.source.dim(x) else []
            if M is None:
                raise la_error(self, x)
            return M
        return BundleMap(self.target, self.source, at, f"{self.name}^-1")

    def is_iso(self, points=None):
        Y = self.source.base
        pts = points if points is not None else [r for r, _, _ in Y.orbits]
        for x in pts:
            if self.source.dim(x) != self.target.dim(x):
                return False
            if self.source.dim(x) and la.rank(self.at(x)) != self.source.dim(x):
                return False
        return True

    def equals(self, other, points=None):
        """Equality of equivariant maps; comparing at orbit representatives suffices."""
        Y = self.source.base
        pts = points if points is not None else [r for r, _, _ in Y.orbits]
        return all(self.at(x) == other.at(x) for x in pts)

    def is_identity(self, points=None):
        Y = self.source.base
        pts = points if points is not None else [r for r, _, _ in Y.orbits]
        return all(self.at(x) == la.identity(self.source.dim(x)) for x in pts)

    def __add__(self, other):
        return BundleMap(self.source, self.target, lambda x: la.add(self.at(x), other.at(x)))

    def scaled(self, c):
        return BundleMap(self.source, self.target, lambda x: la.scale(c, self.at(x)))


def la_error(phi, x):
    return ArithmeticError(f"{phi.name} is not invertible at {phi.source.base.carrier[x]!r}")


def identity_bundle_map(V):
    return BundleMap(V, V, lambda x: la.identity(V.dim(x)), "id")


def zero_bundle_map(V, W):
    return BundleMap(V, W, lambda x: la.zeros(W.dim(x), V.dim(x)), "0")


# ----------------------------------------------------------- pullback / tensor

def pullback_shriek(f, W):
    if W.base != f.cod:
        raise BaseMismatch(f"pullback along {f.name}: bundle lives on {W.base.name}, not {f.cod.name}")
    u, th = f.u, f.theta
    return Bundle(f.dom, lambda x: W.dim(u[x]), lambda g, x: W.rho(th[g], u[x]),
                  lambda x: W.labels(u[x]), name=f"{f.name}^!{W.name}")


def pullback_map(f, phi):
    S, T = pullback_shriek(f, phi.source), pullback_shriek(f, phi.target)
    return BundleMap(S, T, lambda x: phi.at(f.u[x]), f"{f.name}^!{phi.name}")


def tensor_shriek(V, W):
    if V.base != W.base:
        raise BaseMismatch("tensor of bundles on different bases")
    return Bundle(V.base, lambda x: V.dim(x) * W.dim(x), lambda g, x: la.kron(V.rho(g, x), W.rho(g, x)),
                  lambda x: tuple((a, b) for a in V.labels(x) for b in W.labels(x)),
                  name=f"{V.name}(x){W.name}")


def tensor_maps(phi, psi):
    S = tensor_shriek(phi.source, psi.source)
    T = tensor_shriek(phi.target, psi.target)
    return BundleMap(S, T, lambda x: la.kron(phi.at(x), psi.at(x)), f"{phi.name}(x){psi.name}")


def external_product(V1, V2, base=None):
    P = base or product(V1.base, V2.base)
    n2, m2 = V2.base.group.n, V2.base.m
    return Bundle(P, lambda x: V1.dim(x // m2) * V2.dim(x % m2),
                  lambda g, x: la.kron(V1.rho(g // n2, x // m2), V2.rho(g % n2, x % m2)),
                  lambda x: tuple((a, b) for a in V1.labels(x // m2) for b in V2.labels(x % m2)),
                  name=f"{V1.name}[x]{V2.name}")


def direct_sum(V, W):
    if V.base != W.base:
        raise BaseMismatch("direct sum of bundles on different bases")
    return Bundle(V.base, lambda x: V.dim(x) + W.dim(x),
                  lambda g, x: la.direct_sum([(V.rho(g, x), V.dim(V.base.act[g][x]), V.dim(x)),
                                              (W.rho(g, x), W.dim(W.base.act[g][x]), W.dim(x))]),
                  lambda x: tuple((0, a) for a in V.labels(x)) + tuple((1, b) for b in W.labels(x)),
                  name=f"{V.name}+{W.name}")


def direct_sum_maps(phi, psi):
    S = direct_sum(phi.source, psi.source)
    T = direct_sum(phi.target, psi.target)

    def at(x):
        return la.direct_sum([(phi.at(x), phi.target.dim(x), phi.source.dim(x)),
                              (psi.at(x), psi.target.dim(x), psi.source.dim(x))])
    return BundleMap(S, T, at)


def verdier_dual(V):
    Y = V.base
    G = Y.group
    return Bundle(Y, V.dim, lambda g, x: la.transpose(V.rho(G.inv(g), Y.act[g][x]), V.dim(x)),
                  lambda x: tuple(("dual", a) for a in V.labels(x)), name=f"D{V.name}")


def bundle_on(V, base):
    """Same data viewed on an equal (or index-compatible) base object."""
    return Bundle(base, V.dim, V.rho, V.labels, V.name)


# ---------------------------------------------------------- Ran extension

class _Fiber:
    __slots__ = ("points", "where", "reps", "stabs", "basis", "free", "sizes", "offsets", "dim")


class RanBundle(Bundle):
    """f_* V, the right Kan extension, with lazily computed stalks."""

    def __init__(self, f, V):
        if V.base != f.dom:
            raise BaseMismatch(f"pushforward along {f.name}: bundle lives on {V.base.name}, "
                               f"not {f.dom.name}")
        self.f = f
        self.V = V
        self._fibers = {}
        super().__init__(f.cod, self._fiber_dim, self._ran_rho, self._ran_labels,
                         name=f"{f.name}_*{V.name}")

    @cached_property
    def _preimages(self):
        pre = [[] for _ in range(self.f.cod.m)]
        for x, y in enumerate(self.f.u):
            pre[y].append(x)
        return pre

    def fiber(self, y):
        F = self._fibers.get(y)
        if F is not None:
            return F
        f, V = self.f, self.V
        Yd, Yc = f.dom, f.cod
        Gd, Gc = Yd.group, Yc.group
        order = [Gc.e] + [h for h in range(Gc.n) if h != Gc.e]
        pts = []
        for h in order:
            z = Yc.act[h][y]
            for x in self._preimages[z]:
                pts.append((x, h))
        where = {}
        reps, stabs, basis, free, sizes = [], [], [], [], []
        gens = Gd.generators
        th = f.theta
        for p in pts:
            if p in where:
                continue
            c = len(reps)
            reps.append(p)
            where[p] = (c, Gd.e)
            todo = [p]
            while todo:
                q = todo.pop()
                t = where[q][1]
                for s in gens:
                    r = (Yd.act[s][q[0]], Gc.table[th[s]][q[1]])
                    if r not in where:
                        where[r] = (c, Gd.table[s][t])
                        todo.append(r)
            x0 = p[0]
            stab = [g for g in range(Gd.n) if Yd.act[g][x0] == x0 and th[g] == Gc.e]
            sg = []
            span = frozenset([Gd.e])
            for g in stab:
                if g not in span:
                    sg.append(g)
                    span = Gd.closure(sg)
            stabs.append(tuple(sg))
            d = V.dim(x0)
            if not sg or d == 0:
                B = la.identity(d)
                fr = list(range(d))
            else:
                M = []
                for g in sg:
                    R = V.rho(g, x0)
                    for i in range(d):
                        row = list(R[i])
                        row[i] -= 1
                        M.append(row)
                vecs, fr = la.nullspace_free(M, d)
                B = la.from_columns(vecs, d)
            basis.append(B)
            free.append(fr)
            sizes.append(len(fr))
        F = _Fiber()
        F.points, F.where, F.reps, F.stabs = pts, where, reps, stabs
        F.basis, F.free, F.sizes = basis, free, sizes
        offs, acc = [], 0
        for s in sizes:
            offs.append(acc)
            acc += s
        F.offsets, F.dim = offs, acc
        self._fibers[y] = F
        return F

    def _fiber_dim(self, y):
        return self.fiber(y).dim

    def _ran_labels(self, y):
        F = self.fiber(y)
        Yd, Gc = self.f.dom, self.f.cod.group
        out = []
        for (x, h), fr in zip(F.reps, F.free):
            vl = self.V.labels(x)
            for j in fr:
                out.append((Yd.carrier[x], Gc.labels[h], vl[j]))
        return tuple(out)

    def eval_matrix(self, y, point):
        """Matrix (dim V_x  x  dim stalk_y) taking coordinates to the value at point = (x, h)."""
        F = self.fiber(y)
        c, g = F.where[point]
        x = point[0]
        d = self.V.dim(x)
        out = la.zeros(d, F.dim)
        x0 = F.reps[c][0]
        blk = F.basis[c]
        if g != self.f.dom.group.e:
            blk = la.matmul(self.V.rho(g, x0), blk, F.sizes[c])
        o = F.offsets[c]
        for i in range(d):
            row = out[i]
            src = blk[i]
            for j in range(F.sizes[c]):
                row[o + j] = src[j]
        return out

    def value_at(self, y, s, point):
        return la.matvec(self.eval_matrix(y, point), s)

    def rep_values_from(self, y, c, point, M):
        """Given the value matrix M at a point of component c, return the
        value matrix at the component's representative."""
        F = self.fiber(y)
        c2, g = F.where[point]
        assert c2 == c
        if g == self.f.dom.group.e:
            return M
        Gd = self.f.dom.group
        x = point[0]
        ncols = len(M[0]) if M else 0
        return la.matmul(self.V.rho(Gd.inv(g), x), M, ncols)

    def coords_matrix(self, y, rep_values, ncols):
        """Stack the free rows of per-component value matrices (values at the
        representatives) into a coordinate matrix."""
        F = self.fiber(y)
        out = []
        for c, M in enumerate(rep_values):
            for j in F.free[c]:
                out.append(list(M[j]) if M else [0] * ncols)
        return out

    def coords_from_points(self, y, point_values, ncols):
        """point_values: per component, (point, value matrix at that point)."""
        reps = [self.rep_values_from(y, c, p, M) for c, (p, M) in enumerate(point_values)]
        return self.coords_matrix(y, reps, ncols)

    def _ran_rho(self, k, y):
        f = self.f
        Yc = f.cod
        Gc = Yc.group
        y2 = Yc.act[k][y]
        F1 = self.fiber(y)
        F2 = self.fiber(y2)
        out = la.zeros(F2.dim, F1.dim)
        row = 0
        for c2, (x2, h2) in enumerate(F2.reps):
            q = (x2, Gc.table[h2][k])
            E = self.eval_matrix(y, q)
            for j in F2.free[c2]:
                out[row] = E[j]
                row += 1
        return out


def pushforward_star(f, V):
    _require_rational(getattr(V, "coeff", None))
    return RanBundle(f, V)


pushforward_triangle = pushforward_star


def pushforward_map(f, phi, source=None, target=None):
    """f_* of a bundle map, between the given (or fresh) Ran bundles."""
    S = source or RanBundle(f, phi.source)
    T = target or RanBundle(f, phi.target)

    def at(y):
        FS, FT = S.fiber(y), T.fiber(y)
        reps = []
        for c, (x, h) in enumerate(FS.reps):
            reps.append(la.matmul(phi.at(x), la.matmul(FS.basis[c], _select(FS, c), FS.dim), FS.dim))
        return T.coords_matrix(y, reps, FS.dim)
    return BundleMap(S, T, at, f"{f.name}_*{phi.name}")


def _select(F, c):
    """Matrix (size_c x dim) picking the coordinates of component c."""
    out = la.zeros(F.sizes[c], F.dim)
    for j in range(F.sizes[c]):
        out[j][F.offsets[c] + j] = 1
    return out


def unit_map(f, W, ran=None):
    """eta: W -> f_* f^! W, w |-> (h^-1 ... ) with s_(x,h) = rho_W(h) w."""
    R = ran or RanBundle(f, pullback_shriek(f, W))

    def at(y):
        F = R.fiber(y)
        d = W.dim(y)
        reps = [W.rho(h, y) for (x, h) in F.reps]
        return R.coords_matrix(y, reps, d)
    return BundleMap(W, R, at, "eta")


def counit_map(f, V, ran=None):
    """epsilon: f^! f_* V -> V, s |-> s_(x, e)."""
    R = ran or RanBundle(f, V)
    src = pullback_shriek(f, R)
    e = f.cod.group.e
    return BundleMap(src, V, lambda x: R.eval_matrix(f.u[x], (x, e)), "epsilon")


def invariants_dim(V, x, group_elements):
    d = V.dim(x)
    if d == 0:
        return 0
    M = []
    for g in group_elements:
        R = V.rho(g, x)
        for i in range(d):
            row = list(R[i])
            row[i] -= 1
            M.append(row)
    return d - la.rank(M) if M else d


# ----------------------------------------------------------- Lan extension

class LanBundle(Bundle):
    """f_! V: coinvariants over the comma fiber {(x, h) : h.u(x) = y}."""

    def __init__(self, f, V):
        if V.base != f.dom:
            raise BaseMismatch(f"pushforward along {f.name}: bundle lives on {V.base.name}")
        self.f = f
        self.V = V
        self._fibers = {}
        super().__init__(f.cod, lambda y: self.fiber(y).dim, self._lan_rho, name=f"{f.name}_!{V.name}")

    def fiber(self, y):
        F = self._fibers.get(y)
        if F is not None:
            return F
        f, V = self.f, self.V
        Yd, Yc = f.dom, f.cod
        Gd, Gc = Yd.group, Yc.group
        pts = [(x, h) for h in ([Gc.e] + [h for h in range(Gc.n) if h != Gc.e])
               for x in range(Yd.m) if Yc.act[h][f.u[x]] == y]
        where, reps, Q, L, sizes = {}, [], [], [], []
        th = f.theta
        for p in pts:
            if p in where:
                continue
            c = len(reps)
            reps.append(p)
            where[p] = (c, Gd.e)
            todo = [p]
            while todo:
                q = todo.pop()
                t = where[q][1]
                for s in Gd.generators:
                    r = (Yd.act[s][q[0]], Gc.table[q[1]][Gc.inv(th[s])])
                    if r not in where:
                        where[r] = (c, Gd.table[s][t])
                        todo.append(r)
            x0 = p[0]
            d = V.dim(x0)
            stab = [g for g in range(Gd.n) if Yd.act[g][x0] == x0 and th[g] == Gc.e]
            cols = []
            for g in stab:
                R = V.rho(g, x0)
                for j in range(d):
                    cols.append([R[i][j] - (1 if i == j else 0) for i in range(d)])
            # functionals vanishing on the image of (rho(s) - 1)
            N = la.nullspace(cols, d) if cols else [[1 if i == j else 0 for i in range(d)] for j in range(d)]
            Qc = N
            # a section of the quotient: solve Q L = 1
            Lc = []
            for k in range(len(Qc)):
                e = [1 if i == k else 0 for i in range(len(Qc))]
                Lc.append(la.solve(Qc, e))
            Q.append(Qc)
            L.append(la.from_columns(Lc, d))
            sizes.append(len(Qc))
        F = _Fiber()
        F.points, F.where, F.reps, F.basis, F.free, F.sizes = pts, where, reps, Q, L, sizes
        offs, acc = [], 0
        for s in sizes:
            offs.append(acc)
            acc += s
        F.offsets, F.dim = offs, acc
        self._fibers[y] = F
        return F

    def _lan_rho(self, k, y):
        f = self.f
        Yc = f.cod
        Gc, Gd = Yc.group, f.dom.group
        y2 = Yc.act[k][y]
        F1, F2 = self.fiber(y), self.fiber(y2)
        out = la.zeros(F2.dim, F1.dim)
        for c, (x, h) in enumerate(F1.reps):
            q = (x, Gc.table[k][h])
            c2, g = F2.where[q]
            # class [v] at q = g.rep2 equals [rho(g)^-1 v] at rep2
            M = la.matmul(F2.basis[c2], la.matmul(self.V.rho(Gd.inv(g), x), F1.free[c], F1.sizes[c]),
                          F1.sizes[c])
            for i in range(F2.sizes[c2]):
                for j in range(F1.sizes[c]):
                    out[F2.offsets[c2] + i][F1.offsets[c] + j] = M[i][j]
        return out


def pushforward_bang(f, V):
    return LanBundle(f, V)


def norm_map(f, V, lan=None, ran=None):
    """Nm: f_! V -> f_* V, [v]_(x,h) |-> (sum over g with g.x = x', theta(g) = h' h of rho(g) v)."""
    Lb = lan or LanBundle(f, V)
    Rb = ran or RanBundle(f, V)
    Gd = f.dom.group
    Gc = f.cod.group
    Yd = f.dom

    def at(y):
        FL, FR = Lb.fiber(y), Rb.fiber(y)
        reps = []
        for c2, (x2, h2) in enumerate(FR.reps):
            M = la.zeros(V.dim(x2), FL.dim)
            for c, (x, h) in enumerate(FL.reps):
                target = Gc.table[h2][h]
                acc = None
                for g in range(Gd.n):
                    if Yd.act[g][x] == x2 and f.theta[g] == target:
                        R = la.matmul(V.rho(g, x), FL.free[c], FL.sizes[c])
                        acc = R if acc is None else la.add(acc, R)
                if acc is not None:
                    for i in range(V.dim(x2)):
                        for j in range(FL.sizes[c]):
                            M[i][FL.offsets[c] + j] = acc[i][j]
            reps.append(M)
        return Rb.coords_matrix(y, reps, FL.dim)
    return BundleMap(Lb, Rb, at, "Nm")


# ------------------------------------------------------------ Omega, cochains

def omega_map(Y, coeff):
    """Norm from the coinvariant (class-sum) to the invariant (indicator)
    presentation of level-0 functions: diagonal |Stab(rep)|·1."""
    labels = [Y.carrier[r] for r, _, _ in Y.orbits]
    n = len(labels)
    entries = [[coeff.zero] * n for _ in range(n)]
    for i, (_, _, stab) in enumerate(Y.orbits):
        entries[i][i] = coeff.sum([coeff.one] * len(stab))
    M = Matrix(labels, labels, entries, coeff)
    return M, is_invertible(M)


class LabeledSpace:
    """A finite-dimensional space with a labeled basis, realized as a stalk
    of a Ran bundle. Unpacks as (dim, basis)."""

    def __init__(self, ran, y=0, labels=None):
        self.ran = ran
        self.y = y
        self.dim = ran.dim(y)
        self.basis = tuple(labels) if labels is not None else ran.labels(y)

    def __iter__(self):
        return iter((self.dim, self.basis))

    def __repr__(self):
        return f"LabeledSpace(dim={self.dim})"


def cochains_triangle(Y, V):
    if V.base != Y:
        raise BaseMismatch("cochains: bundle not on the given groupoid")
    R = RanBundle(to_point(Y), V)
    labels = tuple((lab[0], lab[2]) for lab in R.labels(0))
    return LabeledSpace(R, 0, labels)


def cochains_map(phi, source=None, target=None):
    """C(Y, phi) as a matrix between the cochain spaces."""
    Y = phi.source.base
    p = to_point(Y)
    S = source.ran if source is not None else RanBundle(p, phi.source)
    T = target.ran if target is not None else RanBundle(p, phi.target)
    return pushforward_map(p, phi, S, T).at(0)


# ------------------------------------------------------- Hom spaces, iso test

def hom_basis(V, W):
    """Basis of equivariant maps V -> W (each supported on one orbit)."""
    Y = V.base
    out = []
    for k, (r, _, stab) in enumerate(Y.orbits):
        dv, dw = V.dim(r), W.dim(r)
        if dv == 0 or dw == 0:
            continue
        G = Y.group
        gens = []
        span = frozenset([G.e])
        for g in stab:
            if g not in span:
                gens.append(g)
                span = G.closure(gens)
        rows = []
        for g in gens:
            A = la.kron(W.rho(g, r), la.identity(dv))
            B = la.kron(la.identity(dw), la.transpose(V.rho(g, r)))
            rows.extend(la.sub(A, B))
        vecs = la.nullspace(rows, dv * dw) if rows else la.identity(dv * dw)
        for v in vecs:
            M = [v[i * dv:(i + 1) * dv] for i in range(dw)]
            reps = [M if j == k else la.zeros(W.dim(rr), V.dim(rr)) for j, (rr, _, _) in enumerate(Y.orbits)]
            out.append(BundleMap.from_reps(V, W, reps))
    return out


def bundles_isomorphic(V, W):
    """Character comparison at orbit representatives (valid in characteristic 0)."""
    if V.base != W.base:
        return False
    for r, _, _ in V.base.orbits:
        if V.dim(r) != W.dim(r) or V.character(r) != W.character(r):
            return False
    return True


def verdier_pairing(V):
    """Matrix of sum_x <phi_x, s_x> on invariant sections of V and DV."""
    Y = V.base
    D = verdier_dual(V)
    A = cochains_triangle(Y, V).ran
    B = cochains_triangle(Y, D).ran
    FA, FB = A.fiber(0), B.fiber(0)
    out = la.zeros(FB.dim, FA.dim)
    for x in range(Y.m):
        Ea = A.eval_matrix(0, (x, 0))
        Eb = B.eval_matrix(0, (x, 0))
        P = la.matmul(la.transpose(Eb, FB.dim), Ea, FA.dim)
        out = la.add(out, P) if P else out
    return out


# --------------------------------------------------- base change, projection

def base_change_map(square, V):
    """Canonical g^! f_* V -> p2_* p1^! V for an iso-comma square."""
    if not isinstance(square, IsoCommaSquare):
        raise GroupoidError("base change needs a square produced by iso_comma_square")
    f, g = square.f, square.g
    P, p1, p2 = square.P, square.p1, square.p2
    if V.base != f.dom:
        raise BaseMismatch("bundle must live on the domain of the first leg")
    Rf = RanBundle(f, V)
    lhs = pullback_shriek(g, Rf)
    rhs = RanBundle(p2, pullback_shriek(p1, V))
    Gc = f.cod.group

    def at(b):
        FR = rhs.fiber(b)
        y = g.u[b]
        n = Rf.dim(y)
        reps = []
        for (z, kb) in FR.reps:
            a = p1.u[z]
            h = square.cell[z]
            k = Gc.table[Gc.inv(h)][g.theta[kb]]
            reps.append(Rf.eval_matrix(y, (a, k)))
        return rhs.coords_matrix(b, reps, n)
    return BundleMap(lhs, rhs, at, "bc")


def base_change_check(square, V):
    """(ok, witness): witness names the first stalk where the comparison fails."""
    phi = base_change_map(square, V)
    B = square.g.dom
    for b in range(B.m):
        ds, dt = phi.source.dim(b), phi.target.dim(b)
        if ds != dt:
            return False, {"stalk": B.carrier[b], "dims": (ds, dt)}
        if ds and la.rank(phi.at(b)) != ds:
            return False, {"stalk": B.carrier[b], "dims": (ds, dt), "rank": la.rank(phi.at(b))}
    return True, None


def projection_map(f, V, W):
    """f_* V (x) W -> f_*(V (x) f^! W), (s, w) |-> s_(x,h) (x) rho_W(h) w."""
    if W.base != f.cod:
        raise BaseMismatch("W must live on the codomain")
    R = RanBundle(f, V)
    src = tensor_shriek(R, W)
    tgt = RanBundle(f, tensor_shriek(V, pullback_shriek(f, W)))

    def at(y):
        F = tgt.fiber(y)
        reps = [la.kron(R.eval_matrix(y, (x, h)), W.rho(h, y)) for (x, h) in F.reps]
        return tgt.coords_matrix(y, reps, R.dim(y) * W.dim(y))
    return BundleMap(src, tgt, at, "proj")


def projection_formula_check(f, V, W):
    phi = projection_map(f, V, W)
    Y = f.cod
    for y in range(Y.m):
        ds, dt = phi.source.dim(y), phi.target.dim(y)
        if ds != dt or (ds and la.rank(phi.at(y)) != ds):
            return False, {"stalk": Y.carrier[y], "dims": (ds, dt)}
    return True, None
