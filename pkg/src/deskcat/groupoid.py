"""Finite groups, action groupoids X//G and their morphisms."""
from functools import cached_property, lru_cache
from itertools import permutations, product as iproduct


class GroupoidError(ValueError):
    pass


class FinGroup:
    """A finite group given by its full multiplication table.

    Elements are handled internally as indices 0..n-1; ``labels`` holds the
    user-facing names. ``table[i][j]`` is the index of labels[i]*labels[j]."""

    def __init__(self, labels, table, identity=None, name=None, check=True):
        self.labels = tuple(labels)
        self.n = len(self.labels)
        self._index = {a: i for i, a in enumerate(self.labels)}
        if len(self._index) != self.n:
            raise GroupoidError("repeated group element labels")
        table = [list(r) for r in table]
        # entries are labels when every one of them is a label, else indices
        by_label = all(x in self._index for r in table for x in r)
        self.table = tuple(tuple(self._index[x] if by_label else int(x) for x in r) for r in table)
        if identity is None:
            identity = next(i for i in range(self.n)
                            if all(self.table[i][j] == j for j in range(self.n)))
        else:
            identity = self._index[identity] if identity in self._index else identity
        self.e = identity
        self.name = name or f"G{self.n}"
        if check:
            self.validate()
        inv = [None] * self.n
        for i in range(self.n):
            for j in range(self.n):
                if self.table[i][j] == self.e:
                    inv[i] = j
                    break
        self._inv = tuple(inv)

    def validate(self):
        n, t, e = self.n, self.table, self.e
        if len(t) != n or any(len(r) != n for r in t):
            raise GroupoidError("multiplication table has the wrong size")
        for i in range(n):
            if t[e][i] != i or t[i][e] != i:
                raise GroupoidError(f"identity law fails at {self.labels[i]!r}")
            if sorted(t[i]) != list(range(n)):
                raise GroupoidError(f"row of {self.labels[i]!r} is not a permutation (no inverses)")
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise GroupoidError(
                            f"associativity fails at {self.labels[a]!r},{self.labels[b]!r},{self.labels[c]!r}")

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"FinGroup({self.name}, order {self.n})"

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FinGroup) and self.labels == other.labels and self.table == other.table

    @cached_property
    def _hash(self):
        return hash((self.labels, self.table))

    def __hash__(self):
        return self._hash

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise GroupoidError(f"{label!r} is not an element of {self.name}") from None

    def label(self, i):
        return self.labels[i]

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def prod(self, *xs):
        acc = self.e
        for x in xs:
            acc = self.table[acc][x]
        return acc

    def closure(self, gens):
        seen = {self.e}
        todo = [self.e]
        gens = list(gens)
        while todo:
            x = todo.pop()
            for s in gens:
                y = self.table[s][x]
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return frozenset(seen)

    @cached_property
    def generators(self):
        gens = []
        span = frozenset([self.e])
        for g in range(self.n):
            if g not in span:
                gens.append(g)
                span = self.closure(gens)
        return tuple(gens)

    def order_of(self, g):
        k, x = 1, g
        while x != self.e:
            x = self.table[x][g]
            k += 1
        return k

    @cached_property
    def conjugacy_classes(self):
        seen = set()
        classes = []
        for g in range(self.n):
            if g in seen:
                continue
            cls = sorted({self.prod(h, g, self.inv(h)) for h in range(self.n)})
            seen.update(cls)
            classes.append(tuple(cls))
        return tuple(classes)

    def is_abelian(self):
        return all(self.table[a][b] == self.table[b][a] for a in range(self.n) for b in range(self.n))


def cyclic_group(n):
    return FinGroup(range(n), [[(i + j) % n for j in range(n)] for i in range(n)], 0, name=f"Z/{n}")


def trivial_group():
    return cyclic_group(1)


def permutation_group(perms, name=None):
    """Group from a complete list of permutations (tuples of images)."""
    perms = sorted(set(tuple(p) for p in perms))
    idx = {p: i for i, p in enumerate(perms)}
    comp = lambda p, q: tuple(p[q[i]] for i in range(len(q)))
    table = [[idx[comp(p, q)] for q in perms] for p in perms]
    return FinGroup(perms, table, tuple(range(len(perms[0]))), name=name)


def symmetric_group(n):
    return permutation_group(permutations(range(n)), name=f"S{n}")


def generated_permutation_group(gens, name=None):
    gens = [tuple(g) for g in gens]
    e = tuple(range(len(gens[0])))
    seen = {e}
    todo = [e]
    while todo:
        p = todo.pop()
        for s in gens:
            q = tuple(s[p[i]] for i in range(len(p)))
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return permutation_group(seen, name=name)


def dihedral_group(n):
    """Symmetries of an n-gon, order 2n."""
    r = tuple((i + 1) % n for i in range(n))
    s = tuple((-i) % n for i in range(n))
    return generated_permutation_group([r, s], name=f"D{n}")


def quaternion_group():
    # Q8 acting on itself by left multiplication; elements ±1, ±i, ±j, ±k
    names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    basic = {("1", x): x for x in "1ijk"}
    tab = {("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
           ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
           ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j"}
    for x in "ijk":
        tab[(x, "1")] = x
    tab.update(basic)

    def mul(a, b):
        sa, a0 = (a[0] == "-"), a.lstrip("-")
        sb, b0 = (b[0] == "-"), b.lstrip("-")
        r = tab[(a0, b0)]
        neg = sa ^ sb ^ r.startswith("-")
        r0 = r.lstrip("-")
        return ("-" + r0) if neg else r0

    return FinGroup(names, [[mul(a, b) for b in names] for a in names], "1", name="Q8")


@lru_cache(maxsize=256)
def product_group(G, H):
    n2 = H.n
    labels = [(a, b) for a in G.labels for b in H.labels]
    table = [[G.table[i1][j1] * n2 + H.table[i2][j2]
              for j1 in range(G.n) for j2 in range(H.n)]
             for i1 in range(G.n) for i2 in range(H.n)]
    P = FinGroup(labels, table, G.e * n2 + H.e, name=f"{G.name}x{H.name}", check=False)
    return P


def klein_group():
    return product_group(cyclic_group(2), cyclic_group(2))


def extend_homomorphism(G, H, images):
    """Extend {generator index: image index} to a homomorphism G -> H, or None."""
    theta = {G.e: H.e}
    todo = [G.e]
    gens = list(images)
    if G.closure(gens) != frozenset(range(G.n)):
        raise GroupoidError("images must be given on a generating set")
    while todo:
        x = todo.pop()
        for s in gens:
            y = G.table[s][x]
            v = H.table[images[s]][theta[x]]
            if y in theta:
                if theta[y] != v:
                    return None
            else:
                theta[y] = v
                todo.append(y)
    th = tuple(theta[g] for g in range(G.n))
    for a in range(G.n):
        for b in range(G.n):
            if th[G.table[a][b]] != H.table[th[a]][th[b]]:
                return None
    return th


def automorphisms(G):
    gens = G.generators
    out = []
    for imgs in iproduct(range(G.n), repeat=len(gens)):
        th = extend_homomorphism(G, G, dict(zip(gens, imgs)))
        if th is not None and len(set(th)) == G.n:
            out.append(th)
    return out


def homomorphisms(G, H):
    gens = G.generators
    out = []
    for imgs in iproduct(range(H.n), repeat=len(gens)):
        th = extend_homomorphism(G, H, dict(zip(gens, imgs)))
        if th is not None:
            out.append(th)
    return out


# ----------------------------------------------------------------- groupoids

class FinGroupoid:
    """Action groupoid X//G; ``act[g][x]`` is the index of g·x."""

    def __init__(self, carrier, group, action=None, name=None, check=True):
        self.carrier = tuple(carrier)
        self.m = len(self.carrier)
        self._index = {x: i for i, x in enumerate(self.carrier)}
        if len(self._index) != self.m:
            raise GroupoidError("repeated carrier labels")
        self.group = group
        G = group
        if action is None:
            act = [tuple(range(self.m))] * G.n
        elif callable(action):
            act = [tuple(self._index[action(G.labels[g], x)] for x in self.carrier) for g in range(G.n)]
        elif isinstance(action, dict):
            act = [tuple(self._index[action[G.labels[g], x]] for x in self.carrier) for g in range(G.n)]
        else:
            act = [tuple(r) for r in action]
        self.act = tuple(act)
        self.name = name or f"{self.m}//{G.name}"
        if check:
            self.validate()

    def validate(self):
        G = self.group
        if len(self.act) != G.n or any(len(r) != self.m for r in self.act):
            raise GroupoidError("action table has the wrong size")
        for x in range(self.m):
            if self.act[G.e][x] != x:
                raise GroupoidError(f"e·x != x at x={self.carrier[x]!r}")
        for g in range(G.n):
            for h in range(G.n):
                gh = G.table[g][h]
                for x in range(self.m):
                    if self.act[gh][x] != self.act[g][self.act[h][x]]:
                        raise GroupoidError(
                            f"(gh)·x != g·(h·x) at g={G.labels[g]!r}, h={G.labels[h]!r}, x={self.carrier[x]!r}")

    def __repr__(self):
        return f"FinGroupoid({self.name}: |X|={self.m}, |G|={self.group.n})"

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FinGroupoid) and self.carrier == other.carrier and \
            self.group == other.group and self.act == other.act

    @cached_property
    def _hash(self):
        return hash((self.carrier, self.group, self.act))

    def __hash__(self):
        return self._hash

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise GroupoidError(f"{label!r} is not an object of {self.name}") from None

    @cached_property
    def orbits(self):
        """List of (rep, members, stabilizer) in index terms, ordered by least member."""
        seen = [False] * self.m
        out = []
        G = self.group
        for x in range(self.m):
            if seen[x]:
                continue
            members = sorted({self.act[g][x] for g in range(G.n)})
            for y in members:
                seen[y] = True
            stab = tuple(g for g in range(G.n) if self.act[g][x] == x)
            out.append((x, tuple(members), stab))
        return tuple(out)

    @cached_property
    def orbit_of(self):
        d = {}
        for k, (_, members, _) in enumerate(self.orbits):
            for y in members:
                d[y] = k
        return d

    @cached_property
    def transporter(self):
        """transporter[y] = some g with g·rep(y) = y."""
        t = {}
        for rep, members, _ in self.orbits:
            for g in range(self.group.n):
                y = self.act[g][rep]
                if y not in t:
                    t[y] = g
        return t

    def stabilizer(self, x):
        return tuple(g for g in range(self.group.n) if self.act[g][x] == x)

    def is_discrete(self):
        return all(len(s) == 1 for _, _, s in self.orbits)


def point():
    return FinGroupoid(["*"], trivial_group(), name="pt")


def discrete(labels, name=None):
    return FinGroupoid(labels, trivial_group(), name=name or f"{{{','.join(map(str, labels))}}}")


def classifying(G):
    """pt//G"""
    return FinGroupoid(["*"], G, name=f"pt//{G.name}")


def action_groupoid(carrier, G, action, name=None):
    return FinGroupoid(carrier, G, action, name=name)


def pi0_with_aut(Y):
    return [(Y.carrier[rep], tuple(Y.carrier[y] for y in members), len(stab))
            for rep, members, stab in Y.orbits]


@lru_cache(maxsize=512)
def product(Y1, Y2):
    G = product_group(Y1.group, Y2.group)
    n2 = Y2.group.n
    m2 = Y2.m
    carrier = [(a, b) for a in Y1.carrier for b in Y2.carrier]
    act = []
    for g1 in range(Y1.group.n):
        r1 = Y1.act[g1]
        for g2 in range(n2):
            r2 = Y2.act[g2]
            act.append(tuple(r1[a] * m2 + r2[b] for a in range(Y1.m) for b in range(m2)))
    return FinGroupoid(carrier, G, act, name=f"{Y1.name}x{Y2.name}", check=False)


# ------------------------------------------------------------------- maps

class GroupoidMap:
    """Equivariant functor: theta on groups (indices), u on objects (indices)."""

    def __init__(self, dom, cod, theta, u, name=None, check=True):
        self.dom = dom
        self.cod = cod
        self.theta = tuple(theta)
        self.u = tuple(u)
        self.name = name or "f"
        if check:
            self.validate()

    @classmethod
    def from_labels(cls, dom, cod, on_group, on_objects, name=None):
        """on_group / on_objects: dicts or callables on labels. on_group may
        be given only on generators of dom's group."""
        Gd, Gc = dom.group, cod.group
        get = on_group if callable(on_group) else on_group.__getitem__
        if callable(on_group) or len(on_group) == Gd.n:
            theta = [Gc.index(get(Gd.labels[g])) for g in range(Gd.n)]
        else:
            imgs = {Gd.index(k): Gc.index(v) for k, v in on_group.items()}
            theta = extend_homomorphism(Gd, Gc, imgs)
            if theta is None:
                raise GroupoidError(f"group images do not define a homomorphism ({name or 'map'})")
        geto = on_objects if callable(on_objects) else on_objects.__getitem__
        u = [cod.index(geto(x)) for x in dom.carrier]
        return cls(dom, cod, theta, u, name=name)

    def validate(self):
        Gd, Gc = self.dom.group, self.cod.group
        if len(self.theta) != Gd.n or len(self.u) != self.dom.m:
            raise GroupoidError(f"{self.name}: map tables have the wrong size")
        for a in range(Gd.n):
            for b in range(Gd.n):
                if self.theta[Gd.table[a][b]] != Gc.table[self.theta[a]][self.theta[b]]:
                    raise GroupoidError(f"{self.name}: theta is not a homomorphism at "
                                        f"{Gd.labels[a]!r},{Gd.labels[b]!r}")
        for g in range(Gd.n):
            for x in range(self.dom.m):
                if self.u[self.dom.act[g][x]] != self.cod.act[self.theta[g]][self.u[x]]:
                    raise GroupoidError(f"{self.name}: u(g·x) != theta(g)·u(x) at "
                                        f"g={Gd.labels[g]!r}, x={self.dom.carrier[x]!r}")

    def __repr__(self):
        return f"GroupoidMap({self.name}: {self.dom.name} -> {self.cod.name})"

    def __eq__(self, other):
        return isinstance(other, GroupoidMap) and self.dom == other.dom and self.cod == other.cod \
            and self.theta == other.theta and self.u == other.u

    def __hash__(self):
        return hash((self.theta, self.u))

    def is_iso(self):
        return len(set(self.theta)) == self.cod.group.n == self.dom.group.n and \
            len(set(self.u)) == self.cod.m == self.dom.m

    def inverse(self):
        if not self.is_iso():
            raise GroupoidError(f"{self.name} is not invertible")
        th = [0] * len(self.theta)
        for g, t in enumerate(self.theta):
            th[t] = g
        u = [0] * len(self.u)
        for x, y in enumerate(self.u):
            u[y] = x
        return GroupoidMap(self.cod, self.dom, th, u, name=f"{self.name}^-1", check=False)


def identity_map(Y):
    return GroupoidMap(Y, Y, range(Y.group.n), range(Y.m), name="id", check=False)


def compose(f, g):
    """g ∘ f (first f, then g)."""
    if f.cod != g.dom:
        raise GroupoidError(f"cannot compose {f.name} then {g.name}: codomain mismatch")
    return GroupoidMap(f.dom, g.cod, [g.theta[t] for t in f.theta], [g.u[y] for y in f.u],
                       name=f"{g.name}.{f.name}", check=False)


def to_point(Y):
    return GroupoidMap(Y, point(), [0] * Y.group.n, [0] * Y.m, name="p", check=False)


def pairing(f, g, target=None):
    """(f, g): Z -> Y1 x Y2."""
    if f.dom != g.dom:
        raise GroupoidError("pairing needs a common domain")
    P = target or product(f.cod, g.cod)
    n2, m2 = g.cod.group.n, g.cod.m
    return GroupoidMap(f.dom, P, [a * n2 + b for a, b in zip(f.theta, g.theta)],
                       [a * m2 + b for a, b in zip(f.u, g.u)], name=f"({f.name},{g.name})", check=False)


def diagonal(Y, target=None):
    i = identity_map(Y)
    d = pairing(i, i, target)
    d.name = "Δ"
    return d


def graph(F, target=None):
    """(id, F): Y -> Y x Y."""
    d = pairing(identity_map(F.dom), F, target)
    d.name = f"(id,{F.name})"
    return d


def projection(Y1, Y2, which, source=None):
    P = source or product(Y1, Y2)
    n2, m2 = Y2.group.n, Y2.m
    if which == 0:
        return GroupoidMap(P, Y1, [g // n2 for g in range(P.group.n)], [x // m2 for x in range(P.m)],
                           name="pr1", check=False)
    return GroupoidMap(P, Y2, [g % n2 for g in range(P.group.n)], [x % m2 for x in range(P.m)],
                       name="pr2", check=False)


def product_map(f, g, source=None, target=None):
    S = source or product(f.dom, g.dom)
    T = target or product(f.cod, g.cod)
    n2d, m2d = g.dom.group.n, g.dom.m
    n2c, m2c = g.cod.group.n, g.cod.m
    theta = [f.theta[k // n2d] * n2c + g.theta[k % n2d] for k in range(S.group.n)]
    u = [f.u[x // m2d] * m2c + g.u[x % m2d] for x in range(S.m)]
    return GroupoidMap(S, T, theta, u, name=f"{f.name}x{g.name}", check=False)


def swap_map(Y1, Y2, source=None, target=None):
    S = source or product(Y1, Y2)
    T = target or product(Y2, Y1)
    n1, n2, m1, m2 = Y1.group.n, Y2.group.n, Y1.m, Y2.m
    theta = [(k % n2) * n1 + k // n2 for k in range(S.group.n)]
    u = [(x % m2) * m1 + x // m2 for x in range(S.m)]
    return GroupoidMap(S, T, theta, u, name="swap", check=False)


# ----------------------------------------------------- iso-comma squares

class IsoCommaSquare:
    """P = A x_C B with projections p1: P -> A, p2: P -> B. ``cell[z]`` is the
    element h with h·f(a) = g(b) at the point z = (a, b, h)."""

    def __init__(self, f, g, P, p1, p2, cell):
        self.f, self.g, self.P, self.p1, self.p2, self.cell = f, g, P, p1, p2, cell

    def __iter__(self):
        return iter((self.P, self.p1, self.p2))

    def __repr__(self):
        return f"IsoCommaSquare({self.f.name}, {self.g.name}; |P|={self.P.m})"


def iso_comma_square(f, g):
    if f.cod != g.cod:
        raise GroupoidError(f"iso-comma needs a common codomain ({f.name}, {g.name})")
    A, B, C = f.dom, g.dom, f.cod
    Gc = C.group
    triples = []
    for a in range(A.m):
        fa = f.u[a]
        for b in range(B.m):
            gb = g.u[b]
            for h in range(Gc.n):
                if C.act[h][fa] == gb:
                    triples.append((a, b, h))
    idx = {t: i for i, t in enumerate(triples)}
    G = product_group(A.group, B.group)
    nb = B.group.n
    act = []
    for k in range(G.n):
        ga, gb = divmod(k, nb)
        tf = Gc.inv(f.theta[ga])
        tg = g.theta[gb]
        act.append(tuple(idx[(A.act[ga][a], B.act[gb][b], Gc.prod(tg, h, tf))] for a, b, h in triples))
    carrier = [(A.carrier[a], B.carrier[b], Gc.labels[h]) for a, b, h in triples]
    P = FinGroupoid(carrier, G, act, name=f"{A.name}x_{C.name}{B.name}", check=False)
    p1 = GroupoidMap(P, A, [k // nb for k in range(G.n)], [t[0] for t in triples], name="p1", check=False)
    p2 = GroupoidMap(P, B, [k % nb for k in range(G.n)], [t[1] for t in triples], name="p2", check=False)
    return IsoCommaSquare(f, g, P, p1, p2, tuple(t[2] for t in triples))


def twisted_fixed_points(Y, F):
    """Objects (x, g) with g·u(x) = x; h sends (x, g) to (h·x, h g θ(h)^-1)."""
    if F.dom != Y or F.cod != Y:
        raise GroupoidError("twisted fixed points need an endomorphism of Y")
    G = Y.group
    pts = [(x, g) for x in range(Y.m) for g in range(G.n) if Y.act[g][F.u[x]] == x]
    idx = {p: i for i, p in enumerate(pts)}
    act = []
    for h in range(G.n):
        ti = G.inv(F.theta[h])
        act.append(tuple(idx[(Y.act[h][x], G.prod(h, g, ti))] for x, g in pts))
    carrier = [(Y.carrier[x], G.labels[g]) for x, g in pts]
    return FinGroupoid(carrier, G, act, name=f"Fix({Y.name},{F.name})", check=False)


def inertia(Y):
    return twisted_fixed_points(Y, identity_map(Y))
