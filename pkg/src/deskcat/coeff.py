"""Coefficient systems: commutative semirings and finite quantales, plus
labeled matrices over them and exact rational elimination."""
from collections import namedtuple
from fractions import Fraction
from functools import cached_property
import math

from . import linalg

INF = math.inf


class UnsupportedCoefficient(Exception):
    pass


class LabelMismatch(ValueError):
    pass


class CoeffSystem:
    """Base class. Subclasses supply zero/one/add/mul and, for quantales,
    a finite carrier with an order."""

    is_quantale = False
    is_field = False
    has_negatives = False

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def sum(self, xs):
        acc = self.zero
        for x in xs:
            acc = self.add(acc, x)
        return acc

    def contains(self, a):
        return True

    def neg(self, a):
        raise UnsupportedCoefficient(f"{self.name} has no additive inverses")

    def inv(self, a):
        raise UnsupportedCoefficient(f"{self.name} has no multiplicative inverses")

    def is_unit(self, a):
        return a == self.one

    def residuate(self, a, b):
        raise UnsupportedCoefficient(f"residuation needs a quantale, not {self.name}")

    def elements(self):
        raise UnsupportedCoefficient(f"{self.name} has no finite carrier")

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return type(self) is type(other) and self.key() == other.key()

    def __hash__(self):
        return hash((type(self).__name__, self.key()))

    def key(self):
        return ()


class RationalField(CoeffSystem):
    name = "rational"
    is_field = True
    has_negatives = True
    zero = 0
    one = 1

    def coerce(self, a):
        return linalg.normalize(Fraction(a))

    def contains(self, a):
        return isinstance(a, (int, Fraction)) and not isinstance(a, bool)

    def add(self, a, b):
        return linalg.normalize(a + b)

    def mul(self, a, b):
        return linalg.normalize(a * b)

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return linalg.normalize(Fraction(1) / a)

    def is_unit(self, a):
        return a != 0


class IntegerRing(CoeffSystem):
    name = "integer"
    has_negatives = True
    zero = 0
    one = 1

    def coerce(self, a):
        if Fraction(a).denominator != 1:
            raise ValueError(f"{a} is not an integer")
        return int(a)

    def contains(self, a):
        return isinstance(a, int) and not isinstance(a, bool)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_unit(self, a):
        return a in (1, -1)

    def inv(self, a):
        if a not in (1, -1):
            raise UnsupportedCoefficient(f"{a} is not invertible in the integers")
        return a


class NaturalSemiring(CoeffSystem):
    name = "natural"
    zero = 0
    one = 1

    def coerce(self, a):
        a = IntegerRing().coerce(a)
        if a < 0:
            raise ValueError(f"{a} is not a natural number")
        return a

    def contains(self, a):
        return isinstance(a, int) and not isinstance(a, bool) and a >= 0

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def is_unit(self, a):
        return a == 1

    def inv(self, a):
        raise UnsupportedCoefficient("the natural semiring has no inverses")


class Quantale(CoeffSystem):
    """Finite commutative quantale. ``add`` is join and ``mul`` is tensor."""

    is_quantale = True

    def _join2(self, a, b):
        raise NotImplementedError

    def _tensor(self, a, b):
        raise NotImplementedError

    def elements(self):
        return self.carrier

    def contains(self, a):
        return a in self._index

    @cached_property
    def _index(self):
        return {a: i for i, a in enumerate(self.carrier)}

    @cached_property
    def _tables(self):
        C = self.carrier
        join = {(a, b): self._join2(a, b) for a in C for b in C}
        tens = {(a, b): self._tensor(a, b) for a in C for b in C}
        leq = {(a, b): join[a, b] == b for a in C for b in C}
        bottom = C[0]
        for a in C:
            bottom = a if leq[a, bottom] else bottom
        top = C[0]
        for a in C:
            top = a if leq[top, a] else top
        res = {}
        for a in C:
            for b in C:
                acc = bottom
                for x in C:
                    if leq[tens[x, a], b]:
                        acc = join[acc, x]
                res[a, b] = acc
        meet = {}
        for a in C:
            for b in C:
                acc = bottom
                for x in C:
                    if leq[x, a] and leq[x, b]:
                        acc = join[acc, x]
                meet[a, b] = acc
        return join, tens, leq, res, meet, bottom, top

    @property
    def zero(self):
        return self._tables[5]

    @property
    def bottom(self):
        return self._tables[5]

    @property
    def top(self):
        return self._tables[6]

    def add(self, a, b):
        return self._tables[0][a, b]

    join2 = add

    def mul(self, a, b):
        return self._tables[1][a, b]

    tensor = mul

    def leq(self, a, b):
        return self._tables[2][a, b]

    def lt(self, a, b):
        return a != b and self._tables[2][a, b]

    def residuate(self, a, b):
        """Largest x with x ⊗ a ≤ b."""
        return self._tables[3][a, b]

    def meet2(self, a, b):
        return self._tables[4][a, b]

    def join(self, xs):
        acc = self.bottom
        t = self._tables[0]
        for x in xs:
            acc = t[acc, x]
        return acc

    def meet(self, xs):
        acc = self.top
        t = self._tables[4]
        for x in xs:
            acc = t[acc, x]
        return acc

    def is_unit(self, a):
        return any(self.mul(a, b) == self.one for b in self.carrier)

    def inv(self, a):
        for b in self.carrier:
            if self.mul(a, b) == self.one:
                return b
        raise UnsupportedCoefficient(f"{a!r} is not invertible in {self.name}")


class BooleanQuantale(Quantale):
    name = "boolean"
    carrier = (0, 1)
    one = 1

    def coerce(self, a):
        if a in (0, 1, False, True):
            return int(a)
        raise ValueError(f"{a!r} is not a truth value")

    def _join2(self, a, b):
        return a | b

    def _tensor(self, a, b):
        return a & b


class TropicalQuantale(Quantale):
    """{0..cap, ∞} with join = min and capped addition. The order is reversed:
    0 is the top (and the unit), ∞ the bottom."""

    one = 0

    def __init__(self, cap=9):
        if cap < 0:
            raise ValueError("cap must be a natural number")
        self.cap = int(cap)
        self.carrier = tuple(range(self.cap + 1)) + (INF,)
        self.name = f"tropical({self.cap})"

    def key(self):
        return (self.cap,)

    def coerce(self, a):
        if a in ("inf", "∞", INF):
            return INF
        a = int(a)
        if not 0 <= a <= self.cap:
            raise ValueError(f"{a} outside tropical carrier 0..{self.cap}")
        return a

    def _join2(self, a, b):
        return min(a, b)

    def _tensor(self, a, b):
        if a == INF or b == INF:
            return INF
        return min(a + b, self.cap)


class FiniteLatticeQuantale(Quantale):
    """A quantale given by explicit tables over a finite carrier.

    ``join`` and ``tensor`` are dicts keyed by pairs (or nested lists indexed
    by carrier position); ``unit`` is the tensor unit."""

    def __init__(self, carrier, join, tensor, unit, name="lattice"):
        self.carrier = tuple(carrier)
        idx = {a: i for i, a in enumerate(self.carrier)}

        def as_dict(t):
            if isinstance(t, dict):
                return dict(t)
            return {(a, b): t[idx[a]][idx[b]] for a in self.carrier for b in self.carrier}

        self._join_t = as_dict(join)
        self._tens_t = as_dict(tensor)
        self.one = unit
        self.name = name

    def key(self):
        return (self.carrier, tuple(sorted(self._join_t.items(), key=repr)),
                tuple(sorted(self._tens_t.items(), key=repr)), self.one)

    def coerce(self, a):
        if a in self._index:
            return a
        for c in self.carrier:
            if str(c) == str(a):
                return c
        raise ValueError(f"{a!r} not in carrier")

    def _join2(self, a, b):
        return self._join_t[a, b]

    def _tensor(self, a, b):
        return self._tens_t[a, b]


def chain_quantale(n_levels=3, top_idempotent=True):
    """{⊥ < e < ⊤} style chain: the unit e sits strictly below ⊤.

    Elements are 0 (bottom), 1 (unit), 2 (top); ⊤⊗⊤ = ⊤ and x⊗⊥ = ⊥."""
    C = (0, 1, 2)
    join = {(a, b): max(a, b) for a in C for b in C}
    tens = {}
    for a in C:
        for b in C:
            if a == 0 or b == 0:
                tens[a, b] = 0
            elif a == 1:
                tens[a, b] = b
            elif b == 1:
                tens[a, b] = a
            else:
                tens[a, b] = 2
    return FiniteLatticeQuantale(C, join, tens, 1, name="chain3")


def group_powerset_quantale(n):
    """Subsets of Z/n under union and Minkowski sum. Singletons are the
    invertible elements; the unit is {0}."""
    from itertools import combinations
    els = []
    for k in range(n + 1):
        for c in combinations(range(n), k):
            els.append(frozenset(c))
    join = {(a, b): a | b for a in els for b in els}
    tens = {(a, b): frozenset((x + y) % n for x in a for y in b) for a in els for b in els}
    return FiniteLatticeQuantale(els, join, tens, frozenset([0]), name=f"P(Z/{n})")


def quantale_law_violations(Q):
    """Exhaustive check of the quantale laws; returns a list of messages."""
    bad = []
    C = Q.elements()
    for a in C:
        if Q.mul(Q.one, a) != a:
            bad.append(f"unit: 1⊗{a!r} != {a!r}")
        for b in C:
            if Q.mul(a, b) != Q.mul(b, a):
                bad.append(f"commutativity at {a!r},{b!r}")
            for c in C:
                if Q.mul(Q.mul(a, b), c) != Q.mul(a, Q.mul(b, c)):
                    bad.append(f"associativity at {a!r},{b!r},{c!r}")
                if Q.mul(a, Q.add(b, c)) != Q.add(Q.mul(a, b), Q.mul(a, c)):
                    bad.append(f"distributivity at {a!r},{b!r},{c!r}")
                if Q.add(Q.add(a, b), c) != Q.add(a, Q.add(b, c)):
                    bad.append(f"join associativity at {a!r},{b!r},{c!r}")
        if Q.mul(a, Q.bottom) != Q.bottom:
            bad.append(f"bottom not absorbing at {a!r}")
    return bad


# ---------------------------------------------------------------- matrices

class Matrix:
    """Labeled matrix over a coefficient system."""

    __slots__ = ("rows", "cols", "entries", "coeff")

    def __init__(self, rows, cols, entries, coeff=None):
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.coeff = coeff or RationalField()
        entries = tuple(tuple(r) for r in entries)
        if len(entries) != len(self.rows) or any(len(r) != len(self.cols) for r in entries):
            raise ValueError("entry count does not match labels")
        for r in entries:
            for a in r:
                if not self.coeff.contains(a):
                    raise ValueError(f"{a!r} is not a valid {self.coeff.name} value")
        self.entries = entries

    @classmethod
    def from_lists(cls, entries, coeff=None, rows=None, cols=None):
        coeff = coeff or RationalField()
        entries = [[coeff.coerce(a) for a in r] for r in entries]
        m = len(entries)
        n = len(entries[0]) if entries else 0
        return cls(rows if rows is not None else range(m), cols if cols is not None else range(n),
                   entries, coeff)

    @classmethod
    def identity(cls, labels, coeff=None):
        coeff = coeff or RationalField()
        labels = tuple(labels)
        return cls(labels, labels, [[coeff.one if i == j else coeff.zero for j in range(len(labels))]
                                    for i in range(len(labels))], coeff)

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def __getitem__(self, key):
        r, c = key
        return self.entries[self.rows.index(r)][self.cols.index(c)]

    def __eq__(self, other):
        return isinstance(other, Matrix) and (self.rows, self.cols, self.entries, self.coeff) == \
            (other.rows, other.cols, other.entries, other.coeff)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"Matrix({[list(r) for r in self.entries]}, {self.coeff.name})"

    def tolist(self):
        return [list(r) for r in self.entries]

    def __matmul__(self, other):
        return mat_mul(self, other)


def mat_mul(A, B):
    if A.coeff != B.coeff:
        raise LabelMismatch(f"coefficient systems differ: {A.coeff} vs {B.coeff}")
    if A.cols != B.rows:
        raise LabelMismatch(f"column labels {A.cols} do not match row labels {B.rows}")
    K = A.coeff
    out = []
    for row in A.entries:
        out.append([K.sum(K.mul(a, B.entries[k][j]) for k, a in enumerate(row))
                    for j in range(len(B.cols))])
    return Matrix(A.rows, B.cols, out, K)


def is_invertible(A):
    """Invertibility over the active coefficients.

    Rings: square with unit determinant. Semirings and quantales without
    negatives: a monomial matrix whose nonzero entries are units (the only
    invertible matrices there)."""
    m, n = A.shape
    if m != n:
        return False
    K = A.coeff
    if isinstance(K, RationalField):
        return linalg.rank([list(r) for r in A.entries]) == n
    if isinstance(K, IntegerRing):
        return abs(determinant(A)) == 1
    zero = K.zero
    for r in A.entries:
        nz = [a for a in r if a != zero]
        if len(nz) != 1 or not K.is_unit(nz[0]):
            return False
    for j in range(n):
        if sum(1 for r in A.entries if r[j] != zero) != 1:
            return False
    return True


def determinant(A):
    if not A.coeff.has_negatives:
        raise UnsupportedCoefficient(f"determinant needs negatives, not {A.coeff.name}")
    M = [[Fraction(a) for a in r] for r in A.entries]
    n = len(M)
    det = Fraction(1)
    for j in range(n):
        p = next((i for i in range(j, n) if M[i][j]), None)
        if p is None:
            return 0
        if p != j:
            M[j], M[p] = M[p], M[j]
            det = -det
        det *= M[j][j]
        for i in range(j + 1, n):
            f = M[i][j] / M[j][j]
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[j])]
    return linalg.normalize(det)


SolveResult = namedtuple("SolveResult", "rank kernel image")


def _label_key(x):
    return (type(x).__name__, x) if isinstance(x, (int, str, Fraction)) else (type(x).__name__, repr(x))


def q_linear_solve(A):
    """Rank, null-space basis and column-space basis of a rational matrix.

    Columns are eliminated in ascending label order. Kernel vectors are
    tuples indexed like ``A.cols``; image vectors are columns of A indexed
    like ``A.rows``."""
    if not isinstance(A.coeff, RationalField):
        raise UnsupportedCoefficient(f"q_linear_solve needs rational coefficients, not {A.coeff.name}")
    order = sorted(range(len(A.cols)), key=lambda j: _label_key(A.cols[j]))
    rows = [list(r) for r in A.entries]
    _, pivots = linalg.rref(rows, len(A.cols), order)
    ker = linalg.nullspace(rows, len(A.cols), order)
    image = [tuple(r[j] for r in A.entries) for j in pivots]
    return SolveResult(len(pivots), [tuple(v) for v in ker], image)


COEFF_NAMES = {
    "rational": RationalField,
    "integer": IntegerRing,
    "natural": NaturalSemiring,
    "boolean": BooleanQuantale,
}


def coeff_from_spec(spec):
    """'rational', 'boolean', 'tropical(9)', {'tropical': 9}, ..."""
    if isinstance(spec, CoeffSystem):
        return spec
    if isinstance(spec, dict):
        if "tropical" in spec:
            return TropicalQuantale(spec["tropical"])
        if "lattice" in spec:
            d = spec["lattice"]
            carrier = d["carrier"]
            return FiniteLatticeQuantale(carrier, d["join"], d["tensor"], d["unit"],
                                         name=d.get("name", "lattice"))
        raise ValueError(f"unknown coefficient spec {spec!r}")
    s = str(spec).strip().lower()
    if s in COEFF_NAMES:
        return COEFF_NAMES[s]()
    if s.startswith("tropical"):
        cap = s[len("tropical"):].strip("() ") or "9"
        return TropicalQuantale(int(cap))
    if s == "chain3":
        return chain_quantale()
    raise ValueError(f"unknown coefficient system {spec!r}")
