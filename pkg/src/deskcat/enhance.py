"""The enhancement Enh(O, A) at quantale level.

O is a finite closed symmetric monoidal poset, F: O -> A a right-lax monoidal
monotone map. Then enh(O, F) is the A-enriched category with
Hom(o1, o2) = F([o1, o2]) and Enh = P(enh). The pair

    iota(v) = v (x) Yon(1_O),   epsilon(Phi) = Phi(1_O)

is the adjunction A <-> Enh, and ulF(o) = Yon(o).
"""
from itertools import product as iproduct

from .enriched import EnrichedCat, EnrichedError, LaxMap, hom_presheaf, is_presheaf, presheaves, yoneda


class ConditionViolation(ValueError):
    def __init__(self, condition, msg):
        super().__init__(f"condition ({condition}) fails: {msg}")
        self.condition = condition


class SMPosetO:
    """Finite symmetric monoidal poset with internal homs (computed)."""

    is_quantale = False

    def __init__(self, objects, leq, tensor, unit, duals=None, name="O", check=True):
        self.objects = tuple(objects)
        self._idx = {o: i for i, o in enumerate(self.objects)}
        self._leq = {(a, b): bool(leq(a, b) if callable(leq) else (a, b) in leq or a == b)
                     for a in self.objects for b in self.objects}
        self._tensor = {(a, b): (tensor(a, b) if callable(tensor) else tensor[a, b])
                        for a in self.objects for b in self.objects}
        self.one = unit
        self.duals = dict(duals) if duals else None
        self.name = name
        if check:
            self.validate()

    def elements(self):
        return self.objects

    def coerce(self, a):
        if a in self._idx:
            return a
        raise ValueError(f"{a!r} is not an object of {self.name}")

    def leq(self, a, b):
        return self._leq[a, b]

    def mul(self, a, b):
        return self._tensor[a, b]

    tensor = mul

    def ihom(self, a, b):
        """[a, b] = the largest x with a (x) x <= b."""
        h = self._ihoms.get((a, b))
        if h is None:
            raise EnrichedError(f"{self.name} has no internal hom [{a!r}, {b!r}]")
        return h

    @property
    def _ihoms(self):
        cache = self.__dict__.get("_ihom_cache")
        if cache is None:
            cache = {}
            for a in self.objects:
                for b in self.objects:
                    cands = [x for x in self.objects if self._leq[self._tensor[a, x], b]]
                    tops = [x for x in cands if all(self._leq[y, x] for y in cands)]
                    if tops:
                        cache[a, b] = tops[0]
            self.__dict__["_ihom_cache"] = cache
        return cache

    def validate(self):
        O, L, T = self.objects, self._leq, self._tensor
        for a in O:
            if self.one not in self._idx:
                raise EnrichedError("unit is not an object")
            if T[self.one, a] != a:
                raise EnrichedError(f"unit law fails at {a!r}")
            for b in O:
                if T[a, b] not in self._idx:
                    raise EnrichedError(f"tensor of {a!r},{b!r} is not an object")
                if T[a, b] != T[b, a]:
                    raise EnrichedError(f"tensor not symmetric at {a!r},{b!r}")
                if L[a, b] and L[b, a] and a != b:
                    raise EnrichedError(f"order is not antisymmetric at {a!r},{b!r}")
                for c in O:
                    if T[T[a, b], c] != T[a, T[b, c]]:
                        raise EnrichedError(f"tensor not associative at {a!r},{b!r},{c!r}")
                    if L[a, b] and L[b, c] and not L[a, c]:
                        raise EnrichedError(f"order not transitive at {a!r},{b!r},{c!r}")
                    if L[a, b] and not L[T[a, c], T[b, c]]:
                        raise EnrichedError(f"tensor not monotone at {a!r},{b!r},{c!r}")
        for a in O:
            for b in O:
                self.ihom(a, b)
        if self.duals is not None:
            for o in O:
                d = self.duals.get(o)
                if d is None or T[o, d] != self.one:
                    raise EnrichedError(f"{d!r} is not a dual of {o!r}")
        return self

    def has_duals(self):
        return self.duals is not None and all(o in self.duals for o in self.objects)


def sm_poset_from_quantale(Q, name=None):
    duals = {}
    for a in Q.elements():
        for b in Q.elements():
            if Q.mul(a, b) == Q.one:
                duals[a] = b
    full = len(duals) == len(Q.elements())
    return SMPosetO(Q.elements(), Q.leq, Q.mul, Q.one, duals if full else None, name=name or Q.name)


def discrete_group_poset(G, name=None):
    """A finite group as a discrete symmetric monoidal category (G abelian)."""
    if not G.is_abelian():
        raise EnrichedError("a discrete group object must be abelian to be symmetric")
    labs = G.labels
    duals = {labs[g]: labs[G.inv(g)] for g in range(G.n)}
    return SMPosetO(labs, lambda a, b: a == b, lambda a, b: labs[G.mul(G.index(a), G.index(b))],
                    labs[G.e], duals, name=name or f"disc({G.name})")


def unit_sm_poset():
    return SMPosetO(["1"], lambda a, b: True, lambda a, b: "1", "1", {"1": "1"}, name="unit")


def LaxFunctorF(O, A, fn, name="F", check=True):
    return LaxMap(O, A, fn, name=name, check=check)


def build_enh(O, F):
    A = F.A2
    objs = O.objects
    tbl = [[F(O.ihom(a, b)) for b in objs] for a in objs]
    C = EnrichedCat(A, objs, tbl, name=f"enh({O.name})", check=False)
    v = C.violation()
    if v is not None:
        raise EnrichedError(f"enh composition fails (invalid lax data): {v}", v)
    return C


class EnhResult:
    def __init__(self, O, F, enh, Enh):
        self.O, self.F, self.enh, self.Enh = O, F, enh, Enh
        self.A = F.A2
        self.ulF = {o: yoneda(enh, o) for o in O.objects}
        self.unit = self.ulF[O.one]
        self._u = enh.index[O.one]

    def iota(self, v):
        return tuple(self.A.mul(v, x) for x in self.unit)

    def epsilon(self, phi):
        return phi[self._u]

    def day(self, p1, p2):
        """(p1 * p2)(o) = join over o1, o2 of Hom(o, o1 (x) o2) (x) p1(o1) (x) p2(o2)."""
        A, C, O = self.A, self.enh, self.O
        out = []
        for i, o in enumerate(C.objects):
            acc = A.bottom
            for j, o1 in enumerate(C.objects):
                if p1[j] == A.bottom:
                    continue
                for k, o2 in enumerate(C.objects):
                    t = C.index[O.mul(o1, o2)]
                    acc = A.add(acc, A.mul(C.table[i][t], A.mul(p1[j], p2[k])))
            out.append(acc)
        return tuple(out)

    def hom(self, p1, p2):
        return hom_presheaf(self.Enh, p1, p2)

    def first_req_holds(self):
        return all(self.epsilon(self.ulF[o]) == self.F(o) for o in self.O.objects)


def build_Enh(O, F, limit=2 ** 16):
    enh = build_enh(O, F)
    size = len(F.A2.elements()) ** len(O.objects)
    P = presheaves(enh, limit)
    if len(P) > limit:
        raise EnrichedError(f"presheaf module has {len(P)} elements, above the bound {limit} "
                            f"(full space {size})")
    R = EnhResult(O, F, enh, P)
    if not R.first_req_holds():
        raise AssertionError("epsilon . ulF differs from F")
    return R


# ------------------------------------------------------------------- checks

def hom_distortion(R):
    """Pairs (a, b) where hom(iota a, iota b) differs from residuate(a, b)."""
    A = R.A
    bad = []
    for a in A.elements():
        for b in A.elements():
            h = R.hom(R.iota(a), R.iota(b))
            r = A.residuate(a, b)
            if h != r:
                bad.append((a, b, h, r))
    return bad


def check_strict_unital_ff(R):
    """(iota is hom-preserving, report). Strict unitality forces the first."""
    bad = hom_distortion(R)
    strict = R.F.is_strict_unital()
    if strict and bad:
        raise AssertionError(f"strictly unital F but iota distorts homs: {bad[0]}")
    return not bad, {"strict_unital": strict, "distortion": bad}


def ambidexterity_conditions(R):
    """Which of conditions (1)-(3) fail, as a list of (number, message)."""
    O, F, A = R.O, R.F, R.A
    out = []
    if not F.is_strict_unital():
        out.append((1, f"F(1_O) = {F(O.one)!r} is not the unit {A.one!r}"))
    if not O.has_duals():
        out.append((2, "not every object of O has a dual"))
    else:
        for o in O.objects:
            d = O.duals[o]
            p = A.mul(F(o), F(d))
            if p != A.one:
                out.append((3, f"F({o!r}) (x) F({d!r}) = {p!r}, not the unit"))
                break
    return out


def ambidexterity_holds(R):
    """hom(Phi, iota v) = residuate(epsilon Phi, v) for every Phi and v,
    besides the always-true iota -| epsilon."""
    A = R.A
    for phi in R.Enh.elements:
        e = R.epsilon(phi)
        for v in A.elements():
            iv = R.iota(v)
            if R.hom(phi, iv) != A.residuate(e, v):
                return False, (phi, v)
            if R.hom(iv, phi) != A.residuate(v, e):
                return False, (v, phi)
    return True, None


def check_ambidexterity(R):
    bad = ambidexterity_conditions(R)
    if bad:
        n, msg = bad[0]
        raise ConditionViolation(n, msg)
    ok, w = ambidexterity_holds(R)
    if not ok:
        raise AssertionError(f"ambidexterity fails at {w!r} although (1)-(3) hold")
    return True


def collapse_conditions(R):
    O, F, A = R.O, R.F, R.A
    out = []
    if not F.is_strict():
        out.append(("strict", "F is not strictly monoidal"))
    if not O.has_duals():
        out.append(("duals", "not every object of O is dualizable"))
    return out


def collapse_holds(R):
    """iota and epsilon are mutually inverse on the finite module."""
    A = R.A
    for v in A.elements():
        if R.epsilon(R.iota(v)) != v:
            return False, ("unit", v)
    for phi in R.Enh.elements:
        if R.iota(R.epsilon(phi)) != phi:
            return False, ("counit", phi)
    return True, None


def check_collapse(R):
    bad = collapse_conditions(R)
    if bad:
        raise ConditionViolation(bad[0][0], bad[0][1])
    ok, w = collapse_holds(R)
    if not ok:
        raise AssertionError(f"collapse fails at {w!r} although F is strict and O has duals")
    return True


def day_unit_laws(R):
    U = R.unit
    return all(R.day(U, p) == p and R.day(p, U) == p for p in R.Enh.elements)


def ulF_monoidal(R):
    O = R.O
    return all(R.ulF[O.mul(a, b)] == R.day(R.ulF[a], R.ulF[b]) for a in O.objects for b in O.objects)


def yoneda_on_representables(R):
    O, F = R.O, R.F
    return all(R.hom(R.ulF[a], R.ulF[b]) == F(O.ihom(a, b)) for a in O.objects for b in O.objects)


def monadic_closure_check(R):
    """free . restrict on A^S is a closure operator with the presheaves as fixed points."""
    A, C = R.A, R.enh
    n = C.n

    def T(phi):
        return tuple(A.join([A.mul(phi[j], C.table[i][j]) for j in range(n)]) for i in range(n))

    def le(x, y):
        return all(A.leq(a, b) for a, b in zip(x, y))
    allf = list(iproduct(A.elements(), repeat=n))
    Tv = {phi: T(phi) for phi in allf}
    fixed = set()
    for phi in allf:
        t = Tv[phi]
        if not le(phi, t) or Tv[t] != t:
            return False
        if t == phi:
            fixed.add(phi)
    # monotone along covering steps in one coordinate is monotone everywhere
    els = A.elements()
    covers = [(a, b) for a in els for b in els if A.lt(a, b)
              and not any(A.lt(a, c) and A.lt(c, b) for c in els)]
    up = {}
    for a, b in covers:
        up.setdefault(a, []).append(b)
    for phi in allf:
        for i in range(n):
            for b in up.get(phi[i], ()):
                psi = phi[:i] + (b,) + phi[i + 1:]
                if not le(Tv[phi], Tv[psi]):
                    return False
    return fixed == {p for p in allf if is_presheaf(C, p)}


# ------------------------------------------------------------ change of source

class SourceChange:
    def __init__(self, R1, R2, phi, strict, lan):
        self.R1, self.R2, self.phi, self.strict, self.lan = R1, R2, phi, strict, lan

    def __call__(self, psi):
        return self.lan(psi)

    def hom_preserving(self):
        E1 = self.R1.Enh
        for x in E1.elements:
            for y in E1.elements:
                if self.R2.hom(self.lan(x), self.lan(y)) != self.R1.hom(x, y):
                    return False
        return True


def change_source(R1, R2, phi):
    """Map Enh1 -> Enh2 induced by a symmetric monoidal phi: O1 -> O2 with
    F1 <= F2 . phi. Returns (map, ff report or None when not claimed)."""
    O1, O2 = R1.O, R2.O
    A = R1.A
    if R2.A != A:
        raise EnrichedError("change of source needs a common target quantale")
    ph = phi if callable(phi) else dict(phi).__getitem__
    for a in O1.objects:
        for b in O1.objects:
            if O1.leq(a, b) and not O2.leq(ph(a), ph(b)):
                raise EnrichedError(f"phi is not monotone at {a!r},{b!r}")
            if ph(O1.mul(a, b)) != O2.mul(ph(a), ph(b)):
                raise EnrichedError(f"phi is not monoidal at {a!r},{b!r}")
    if ph(O1.one) != O2.one:
        raise EnrichedError("phi does not preserve the unit")
    strict = True
    for o in O1.objects:
        if not A.leq(R1.F(o), R2.F(ph(o))):
            raise EnrichedError(f"invalid transformation: F1({o!r}) is not below F2(phi({o!r}))")
        if R1.F(o) != R2.F(ph(o)):
            strict = False
    C2 = R2.enh
    idx = [C2.index[ph(o)] for o in O1.objects]

    def lan(psi):
        return tuple(A.join([A.mul(psi[k], C2.table[i][j]) for k, j in enumerate(idx)])
                     for i in range(C2.n))
    S = SourceChange(R1, R2, ph, strict, lan)
    report = None
    if strict and O1.has_duals():
        report = S.hom_preserving()
    return S, report


# ------------------------------------------------------ target insensitivity

def unit_module_quantale(A, u):
    """u-modules inside A for a monoid u (u (x) u <= u, 1 <= u): {a : u (x) a = a},
    a quantale with unit u."""
    from .coeff import FiniteLatticeQuantale
    els = [a for a in A.elements() if A.mul(u, a) == a]
    join = {(a, b): A.add(a, b) for a in els for b in els}
    tens = {(a, b): A.mul(a, b) for a in els for b in els}
    return FiniteLatticeQuantale(els, join, tens, u, name=f"{A.name}[{u!r}-mod]")


def check_target_insensitivity(O, F):
    """Enh(O, F(1)-mod) against Enh(O, A): same elements, same homs, and the
    representables generate on both sides."""
    A = F.A2
    u = F(O.one)
    Au = unit_module_quantale(A, u)
    Fu = LaxMap(O, Au, lambda o: F(o), name=f"{F.name}^enh")
    R = build_Enh(O, F)
    Ru = build_Enh(O, Fu)
    if set(R.Enh.elements) != set(Ru.Enh.elements):
        return False
    for a in O.objects:
        for b in O.objects:
            if R.hom(R.ulF[a], R.ulF[b]) != Ru.hom(Ru.ulF[a], Ru.ulF[b]):
                return False
    for x in R.Enh.elements:
        for y in R.Enh.elements:
            if R.hom(x, y) != Ru.hom(x, y):
                return False
    # generation: every element is a join of a (x) Yon(o)
    for RR in (R, Ru):
        AA = RR.A
        for phi in RR.Enh.elements:
            acc = tuple([AA.bottom] * len(phi))
            for o in O.objects:
                y = RR.ulF[o]
                a = phi[RR.enh.index[o]]
                acc = tuple(AA.add(p, AA.mul(a, q)) for p, q in zip(acc, y))
            if acc != phi:
                return False
    return Fu.is_strict_unital()
