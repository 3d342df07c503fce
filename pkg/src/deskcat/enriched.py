"""Quantale-enriched categories, presheaf modules, weighted (co)limits.

Over a (commutative) quantale every coherence datum is an inequality, so an
enriched category is just a hom table with

    1 <= Hom(s, s),    Hom(b, c) (x) Hom(a, b) <= Hom(a, c).

Presheaves are maps Phi: S -> A with Phi(c2) (x) Hom(c1, c2) <= Phi(c1);
Yon(c) = Hom(-, c).  Weights for limits are covariant, Hom(c1, c2) (x) W(c1) <= W(c2),
i.e. presheaves on the opposite category.
"""
from itertools import product as iproduct


class EnrichedError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


def _label(x):
    return x


class EnrichedCat:
    def __init__(self, A, objects, hom, name=None, check=True):
        if not getattr(A, "is_quantale", False):
            raise EnrichedError(f"enrichment base must be a quantale, got {A!r}")
        self.A = A
        self.objects = tuple(objects)
        self.index = {s: i for i, s in enumerate(self.objects)}
        n = len(self.objects)
        if isinstance(hom, dict):
            tbl = [[A.coerce(hom[(s, t)]) for t in self.objects] for s in self.objects]
        else:
            tbl = [[A.coerce(v) for v in row] for row in hom]
        if len(tbl) != n or any(len(r) != n for r in tbl):
            raise EnrichedError("hom table has the wrong shape")
        self.table = tuple(tuple(r) for r in tbl)
        self.name = name or "C"
        if check:
            self.validate()

    @property
    def n(self):
        return len(self.objects)

    def hom(self, s, t):
        return self.table[self.index[s]][self.index[t]]

    def h(self, i, j):
        return self.table[i][j]

    def violation(self):
        A, T, n = self.A, self.table, self.n
        for i in range(n):
            if not A.leq(A.one, T[i][i]):
                return ("unit", (self.objects[i],))
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if not A.leq(A.mul(T[b][c], T[a][b]), T[a][c]):
                        return ("composition", (self.objects[a], self.objects[b], self.objects[c]))
        return None

    def validate(self):
        v = self.violation()
        if v is None:
            return self
        kind, w = v
        if kind == "unit":
            raise EnrichedError(f"unit violation: 1 is not below Hom({w[0]!r},{w[0]!r})", v)
        a, b, c = w
        raise EnrichedError(f"composition violation: Hom({b!r},{c!r}) (x) Hom({a!r},{b!r}) "
                            f"is not below Hom({a!r},{c!r})", v)

    def opposite(self):
        n = self.n
        return EnrichedCat(self.A, self.objects, [[self.table[j][i] for j in range(n)] for i in range(n)],
                           name=f"{self.name}^op", check=False)

    def full_subcategory(self, objs):
        idx = [self.index[s] for s in objs]
        return EnrichedCat(self.A, objs, [[self.table[i][j] for j in idx] for i in idx],
                           name=f"{self.name}|sub", check=False)

    def __eq__(self, other):
        return (isinstance(other, EnrichedCat) and self.A == other.A and self.objects == other.objects
                and self.table == other.table)

    def __hash__(self):
        return hash((self.objects, self.table))

    def __repr__(self):
        return f"EnrichedCat({self.name}, {self.n} objects over {self.A.name})"


def validate_enriched_cat(A, S, table):
    return EnrichedCat(A, S, table)


def unit_category(A):
    return EnrichedCat(A, ["*"], [[A.one]], name="unit")


def self_enrichment(A):
    C = A.elements()
    return EnrichedCat(A, C, [[A.residuate(a, b) for b in C] for a in C], name=f"Self({A.name})")


class LaxMap:
    """Monotone F: A1 -> A2 with F(a) (x) F(b) <= F(a (x) b) and 1 <= F(1)."""

    def __init__(self, A1, A2, fn, name="F", check=True):
        self.A1, self.A2 = A1, A2
        self.fn = fn if callable(fn) else dict(fn).__getitem__
        self.table = {a: A2.coerce(self.fn(a)) for a in A1.elements()}
        self.name = name
        if check:
            self.validate()

    def __call__(self, a):
        return self.table[a]

    def violation(self):
        A1, A2, F = self.A1, self.A2, self.table
        for a in A1.elements():
            for b in A1.elements():
                if A1.leq(a, b) and not A2.leq(F[a], F[b]):
                    return ("monotone", (a, b))
                if not A2.leq(A2.mul(F[a], F[b]), F[A1.mul(a, b)]):
                    return ("lax tensor", (a, b))
        if not A2.leq(A2.one, F[A1.one]):
            return ("lax unit", ())
        return None

    def validate(self):
        v = self.violation()
        if v is not None:
            raise EnrichedError(f"invalid lax structure on {self.name}: {v[0]} fails at {v[1]!r}", v)
        return self

    def is_strict_unital(self):
        return self.table[self.A1.one] == self.A2.one

    def is_strict(self):
        A1, A2, F = self.A1, self.A2, self.table
        return self.is_strict_unital() and all(A2.mul(F[a], F[b]) == F[A1.mul(a, b)]
                                               for a in A1.elements() for b in A1.elements())


def identity_lax(A):
    return LaxMap(A, A, lambda a: a, name="id", check=False)


def change_enrichment(F, C):
    """Transport homs along a lax monoidal F; the composition law must survive."""
    if C.A != F.A1:
        raise EnrichedError("change of enrichment: category is not over the source quantale")
    F.validate()
    D = EnrichedCat(F.A2, C.objects, [[F(v) for v in row] for row in C.table],
                    name=f"{F.name}_!{C.name}", check=False)
    v = D.violation()
    if v is not None:
        raise AssertionError(f"lax map produced an invalid category: {v}")
    return D


def underlying_category(C):
    """The preorder s1 <= s2 iff 1 <= Hom(s1, s2), as a set of pairs."""
    A = C.A
    return frozenset((s, t) for s in C.objects for t in C.objects if A.leq(A.one, C.hom(s, t)))


# ------------------------------------------------------------------ modules

class QuantaleModule:
    """A finite complete lattice M with an action of A preserving joins in
    each variable. ``join`` and ``act`` are callables (or dicts)."""

    def __init__(self, A, elements, join, act, name="M"):
        self.A = A
        self.elements = tuple(elements)
        self._eset = set(self.elements)
        self._join = join if callable(join) else (lambda a, b, t=join: t[a, b])
        self._act = act if callable(act) else (lambda a, m, t=act: t[a, m])
        self.name = name
        self._leq = {}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, m):
        return m in self._eset

    def join2(self, m, n):
        return self._join(m, n)

    def act(self, a, m):
        return self._act(a, m)

    def leq(self, m, n):
        return self._join(m, n) == n

    def join(self, ms):
        out = self.bottom
        for m in ms:
            out = self._join(out, m)
        return out

    @property
    def bottom(self):
        b = getattr(self, "_bottom", None)
        if b is None:
            b = self.elements[0]
            for m in self.elements:
                if self.leq(m, b):
                    b = m
            self._bottom = b
        return b

    @property
    def top(self):
        t = getattr(self, "_top", None)
        if t is None:
            t = self.elements[0]
            for m in self.elements:
                t = self._join(t, m)
            self._top = t
        return t

    def meet(self, ms):
        ms = list(ms)
        out = self.bottom
        for x in self.elements:
            if all(self.leq(x, m) for m in ms):
                out = self._join(out, x)
        return out

    def meet2(self, m, n):
        return self.meet([m, n])

    def cotensor(self, a, m):
        """a -| m: the largest x with a (x) x <= m."""
        out = self.bottom
        for x in self.elements:
            if self.leq(self.act(a, x), m):
                out = self._join(out, x)
        return out

    def hom(self, m, n):
        """Internal hom into A: the largest a with a (x) m <= n."""
        A = self.A
        out = A.bottom
        for a in A.elements():
            if self.leq(self.act(a, m), n):
                out = A.add(out, a)
        return out

    def violations(self, limit=5):
        """Exhaustive module-law check."""
        A = self.A
        bad = []
        E = self.elements
        for m in E:
            if self.act(A.one, m) != m:
                bad.append(("unit", m))
            if self.act(A.bottom, m) != self.bottom:
                bad.append(("bottom action", m))
            for n in E:
                if self.join2(m, n) != self.join2(n, m):
                    bad.append(("join commutative", m, n))
                for a in A.elements():
                    if self.act(a, self.join2(m, n)) != self.join2(self.act(a, m), self.act(a, n)):
                        bad.append(("join in module variable", a, m, n))
            for a in A.elements():
                if self.act(a, m) not in self._eset:
                    bad.append(("closure", a, m))
                for b in A.elements():
                    if self.act(A.mul(a, b), m) != self.act(a, self.act(b, m)):
                        bad.append(("associativity", a, b, m))
                    if self.act(A.add(a, b), m) != self.join2(self.act(a, m), self.act(b, m)):
                        bad.append(("join in scalar variable", a, b, m))
            if len(bad) >= limit:
                break
        for a in A.elements():
            if self.act(a, self.bottom) != self.bottom:
                bad.append(("bottom absorbed", a))
        return bad[:limit]

    def __repr__(self):
        return f"QuantaleModule({self.name}, {len(self)} elements over {self.A.name})"


def module_of_quantale(A):
    return QuantaleModule(A, A.elements(), A.add, A.mul, name=A.name)


def product_module(M, N):
    els = [(m, n) for m in M.elements for n in N.elements]
    return QuantaleModule(M.A, els, lambda x, y: (M.join2(x[0], y[0]), N.join2(x[1], y[1])),
                          lambda a, x: (M.act(a, x[0]), N.act(a, x[1])), name=f"{M.name}x{N.name}")


def pointwise_module(A, elements, name="P"):
    """Module of tuples in A^n closed under pointwise join and action."""
    return QuantaleModule(A, elements, lambda x, y: tuple(A.add(a, b) for a, b in zip(x, y)),
                          lambda a, x: tuple(A.mul(a, v) for v in x), name=name)


# ---------------------------------------------------------------- presheaves

def is_presheaf(C, phi):
    A, n = C.A, C.n
    return all(A.leq(A.mul(phi[j], C.table[i][j]), phi[i]) for i in range(n) for j in range(n))


def is_copresheaf(C, w):
    """Covariant: Hom(c1, c2) (x) W(c1) <= W(c2)."""
    A, n = C.A, C.n
    return all(A.leq(A.mul(C.table[i][j], w[i]), w[j]) for i in range(n) for j in range(n))


def yoneda(C, c):
    j = C.index[c]
    return tuple(C.table[i][j] for i in range(C.n))


def coyoneda(C, c):
    """Hom(c, -), the representable weight for limits."""
    i = C.index[c]
    return tuple(C.table[i])


def _closure(A, gens, n):
    bot = tuple([A.bottom] * n)
    seen = {bot}
    frontier = [bot]
    gens = list(dict.fromkeys(gens))
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(A.add(a, b) for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


class PresheafModule(QuantaleModule):
    def __init__(self, C, limit=2 ** 16):
        A = C.A
        n = C.n
        size = len(A.elements()) ** n
        if size <= limit:
            els = [phi for phi in iproduct(A.elements(), repeat=n) if is_presheaf(C, phi)]
            self.materialized = "enumerated"
        else:
            gens = [tuple(A.mul(a, v) for v in yoneda(C, c)) for a in A.elements() for c in C.objects]
            els = sorted(_closure(A, gens, n), key=repr)
            self.materialized = "closure"
        super().__init__(A, els, lambda x, y: tuple(A.add(a, b) for a, b in zip(x, y)),
                         lambda a, x: tuple(A.mul(a, v) for v in x), name=f"P({C.name})")
        self.C = C

    def leq(self, m, n):
        A = self.A
        return all(A.leq(a, b) for a, b in zip(m, n))

    def hom(self, m, n):
        return hom_presheaf(self, m, n)

    def cotensor(self, a, m):
        return tuple(self.A.residuate(a, v) for v in m)

    def meet(self, ms):
        ms = list(ms)
        if not ms:
            return self.top
        return tuple(self.A.meet(vs) for vs in zip(*ms))

    def yoneda(self, c):
        return yoneda(self.C, c)

    def value(self, phi, c):
        return phi[self.C.index[c]]


def presheaves(C, limit=2 ** 16):
    return PresheafModule(C, limit)


def hom_presheaf(P, phi1, phi2):
    A = P.A
    return A.meet([A.residuate(a, b) for a, b in zip(phi1, phi2)])


# ----------------------------------------------------------- weighted limits

def check_functor(C, phi, M):
    """phi: objects -> M covariant: Hom(c1, c2) (x) phi(c1) <= phi(c2)."""
    for i in range(C.n):
        for j in range(C.n):
            if not M.leq(M.act(C.table[i][j], phi[i]), phi[j]):
                raise EnrichedError(f"diagram is not an enriched functor at "
                                    f"({C.objects[i]!r}, {C.objects[j]!r})", (i, j))


def weighted_limit(C, W, phi, M, check=True):
    """meet_c W(c) -| phi(c) for a covariant weight W."""
    if check:
        check_functor(C, phi, M)
        if not is_copresheaf(C, W):
            raise EnrichedError("limit weight must be covariant")
    return M.meet([M.cotensor(W[i], phi[i]) for i in range(C.n)])


def weighted_colimit(C, W, phi, M, check=True):
    """join_c W(c) (x) phi(c) for a presheaf weight W."""
    if check:
        check_functor(C, phi, M)
        if not is_presheaf(C, W):
            raise EnrichedError("colimit weight must be a presheaf")
    return M.join([M.act(W[i], phi[i]) for i in range(C.n)])


def limit_universal_holds(C, W, phi, M, L=None):
    """For every m: hom(m, L) = meet_c W(c) -> hom(m, phi(c))."""
    A = M.A
    L = weighted_limit(C, W, phi, M) if L is None else L
    for m in M.elements:
        rhs = A.meet([A.residuate(W[i], M.hom(m, phi[i])) for i in range(C.n)])
        if M.hom(m, L) != rhs:
            return False, m
    return True, None


def colimit_universal_holds(C, W, phi, M, L=None):
    """For every m: hom(L, m) = meet_c W(c) -> hom(phi(c), m)."""
    A = M.A
    L = weighted_colimit(C, W, phi, M) if L is None else L
    for m in M.elements:
        rhs = A.meet([A.residuate(W[i], M.hom(phi[i], m)) for i in range(C.n)])
        if M.hom(L, m) != rhs:
            return False, m
    return True, None


def bk_terms(P, psi, n):
    """BK_n(psi) = join over s0..sn of Hom(s0,s1)...Hom(s_{n-1},s_n) (x) psi(s_n) (x) Yon(s0)."""
    if n not in (0, 1, 2):
        raise ValueError("bk_terms is implemented for n in {0, 1, 2}")
    C, A = P.C, P.A
    k = C.n
    out = P.bottom
    for ss in iproduct(range(k), repeat=n + 1):
        a = psi[ss[-1]]
        for i in range(n):
            a = A.mul(C.table[ss[i]][ss[i + 1]], a)
        out = P.join2(out, P.act(a, yoneda(C, C.objects[ss[0]])))
    return out


def bk_reconstruct(P, psi):
    """The realization of BK_1 => BK_0 in a poset is the join of the terms;
    it must give back psi."""
    terms = [bk_terms(P, psi, n) for n in (0, 1, 2)]
    return P.join(terms) == psi and all(P.leq(t, terms[0]) for t in terms[1:])


def bk_limit(C, W, phi, M):
    """Tot of lim^{BK_n(W)} phi for n <= 2, i.e. the meet of the levels."""
    A = M.A
    k = C.n
    levels = []
    for n in (0, 1, 2):
        parts = []
        for ss in iproduct(range(k), repeat=n + 1):
            a = W[ss[0]]
            for i in range(n):
                a = A.mul(C.table[ss[i]][ss[i + 1]], a)
            parts.append(M.cotensor(a, phi[ss[-1]]))
        levels.append(M.meet(parts))
    return M.meet(levels)


def totally_compact_check(m, M):
    """a |-> a (x) m has a right adjoint hom(m, -) that preserves joins and
    commutes with the action."""
    A = M.A
    r = {x: M.hom(m, x) for x in M.elements}
    if r[M.bottom] != A.bottom:
        return False
    for x in M.elements:
        for y in M.elements:
            if r[M.join2(x, y)] != A.add(r[x], r[y]):
                return False
        for a in A.elements():
            if r[M.act(a, x)] != A.mul(a, r[x]):
                return False
    return True


# ------------------------------------------------------- duality, Kan ext.

def pairing(C, phi, w):
    """<phi, w> = join_c phi(c) (x) w(c), phi a presheaf, w a copresheaf."""
    A = C.A
    return A.join([A.mul(a, b) for a, b in zip(phi, w)])


def duality_check(C, limit=2 ** 12):
    """Module maps P(C) -> A correspond bijectively to copresheaves via the pairing."""
    A = C.A
    P = presheaves(C, limit)
    Q = presheaves(C.opposite(), limit)
    yon = [yoneda(C, c) for c in C.objects]
    found = set()
    for vals in iproduct(A.elements(), repeat=C.n):
        def f(phi, vals=vals):
            return A.join([A.mul(phi[i], vals[i]) for i in range(C.n)])
        # f is determined by its values on representables; keep it iff it
        # reproduces those values and is a module map
        if any(f(y) != vals[i] for i, y in enumerate(yon)):
            continue
        ok = all(f(P.join2(x, y)) == A.add(f(x), f(y)) for x in P.elements for y in P.elements) and \
            all(f(P.act(a, x)) == A.mul(a, f(x)) for a in A.elements() for x in P.elements)
        if ok:
            found.add(vals)
    return found == set(Q.elements), len(found), len(Q)


def lan_presheaf(C, sub, phi):
    """Left Kan extension along a full inclusion: (Lan phi)(c) = join_d phi(d) (x) Hom(c, d)."""
    A = C.A
    idx = [C.index[s] for s in sub]
    return tuple(A.join([A.mul(phi[k], C.table[i][j]) for k, j in enumerate(idx)]) for i in range(C.n))


def lan_fully_faithful_check(C, sub):
    D = C.full_subcategory(sub)
    PD, PC = presheaves(D), presheaves(C)
    for x in PD.elements:
        lx = lan_presheaf(C, sub, x)
        for y in PD.elements:
            if hom_presheaf(PC, lx, lan_presheaf(C, sub, y)) != hom_presheaf(PD, x, y):
                return False, (x, y)
    return True, None


# ------------------------------------------------------------ decomposition

def limit_corpus(A, max_objects=2):
    """All categories on at most max_objects objects over A with all covariant weights."""
    out = []
    for n in range(max_objects + 1):
        objs = list(range(n))
        for vals in iproduct(A.elements(), repeat=n * n):
            tbl = [list(vals[i * n:(i + 1) * n]) for i in range(n)]
            C = EnrichedCat(A, objs, tbl, check=False)
            if C.violation() is not None:
                continue
            ws = [w for w in iproduct(A.elements(), repeat=n) if is_copresheaf(C, w)]
            out.append((C, ws))
    return out


def lax_module_maps(M, N):
    """Monotone f: M -> N with a (x) f(m) <= f(a (x) m) (enriched functors)."""
    E = list(M.elements)
    A = M.A
    for vals in iproduct(N.elements, repeat=len(E)):
        f = dict(zip(E, vals))
        if all(not M.leq(x, y) or N.leq(f[x], f[y]) for x in E for y in E) and \
                all(N.leq(N.act(a, f[x]), f[M.act(a, x)]) for a in A.elements() for x in E):
            yield f


def preserves_weighted_limits(f, M, N, corpus):
    for C, ws in corpus:
        diagrams = [d for d in iproduct(M.elements, repeat=C.n)
                    if all(M.leq(M.act(C.table[i][j], d[i]), d[j]) for i in range(C.n) for j in range(C.n))]
        for w in ws:
            for d in diagrams:
                if f[weighted_limit(C, w, d, M, check=False)] != \
                        weighted_limit(C, w, tuple(f[x] for x in d), N, check=False):
                    return False
    return True


def preserves_meets_top_cotensors(f, M, N):
    if f[M.top] != N.top:
        return False
    for x in M.elements:
        for y in M.elements:
            if f[M.meet2(x, y)] != N.meet2(f[x], f[y]):
                return False
        for a in M.A.elements():
            if f[M.cotensor(a, x)] != N.cotensor(a, f[x]):
                return False
    return True
