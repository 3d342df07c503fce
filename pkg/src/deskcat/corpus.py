"""Random and curated instances: groups, G-sets, bundles, kernels, Weil sheaves."""
from functools import lru_cache

from . import linalg as la
from .groupoid import (FinGroupoid, GroupoidMap, automorphisms, cyclic_group, dihedral_group, discrete,
                       homomorphisms, klein_group, product_group, quaternion_group, symmetric_group)
from .sheafcalc import induced_bundle


@lru_cache(maxsize=None)
def small_groups(max_order=8):
    gs = [cyclic_group(n) for n in range(1, min(max_order, 8) + 1)]
    if max_order >= 4:
        gs.append(klein_group())
    if max_order >= 6:
        gs.append(symmetric_group(3))
    if max_order >= 8:
        gs += [dihedral_group(4), quaternion_group(), product_group(cyclic_group(2), cyclic_group(4)),
               product_group(klein_group(), cyclic_group(2))]
    return tuple(g for g in gs if g.n <= max_order)


@lru_cache(maxsize=None)
def subgroups(G):
    subs = {frozenset([G.e])}
    for a in range(G.n):
        subs.add(G.closure([a]))
        for b in range(a + 1, G.n):
            subs.add(G.closure([a, b]))
    return tuple(sorted(subs, key=lambda s: (len(s), sorted(s))))


def coset_space(G, H):
    """Left cosets gH as sorted tuples, with the left action of G."""
    cosets = []
    seen = set()
    for g in range(G.n):
        c = tuple(sorted(G.mul(g, h) for h in H))
        if c not in seen:
            seen.add(c)
            cosets.append(c)
    return cosets


def gset_groupoid(G, Hs, name=None):
    """Disjoint union of coset spaces G/H for H in Hs."""
    carrier = []
    where = {}
    for i, H in enumerate(Hs):
        for c in coset_space(G, H):
            where[(i, c)] = len(carrier)
            carrier.append((i, c[0]))
    act = []
    for g in range(G.n):
        row = []
        for i, H in enumerate(Hs):
            for c in coset_space(G, H):
                img = tuple(sorted(G.mul(g, x) for x in c))
                row.append(where[(i, img)])
        act.append(tuple(row))
    labels = [f"{i}:{G.labels[r]}" for i, r in carrier]
    return FinGroupoid(labels, G, act, name=name or f"X//{G.name}")


def random_groupoid(rng, max_group=8, max_carrier=4, group=None):
    G = group or rng.choice(small_groups(max_group))
    subs = [H for H in subgroups(G) if G.n // len(H) <= max_carrier]
    Hs = []
    size = 0
    for _ in range(rng.randint(1, 3)):
        opts = [H for H in subs if size + G.n // len(H) <= max_carrier]
        if not opts:
            break
        H = rng.choice(opts)
        Hs.append(H)
        size += G.n // len(H)
    return gset_groupoid(G, Hs)


def random_discrete(rng, max_size=6, min_size=1):
    n = rng.randint(min_size, max_size)
    return discrete(list(range(1, n + 1)))


# --------------------------------------------------------- representations

def _gens_of(G, S):
    gens = []
    span = frozenset([G.e])
    for g in sorted(S):
        if g not in span:
            gens.append(g)
            span = G.closure(gens)
    return gens


def sign_characters(G, S):
    """All homomorphisms S -> {1, -1} (S a subgroup of G, as a set of indices)."""
    S = frozenset(S)
    gens = _gens_of(G, S)
    out = []
    for signs in range(2 ** len(gens)):
        vals = {G.e: 1}
        todo = [G.e]
        ok = True
        while todo and ok:
            x = todo.pop()
            for i, s in enumerate(gens):
                y = G.mul(s, x)
                v = (-1 if (signs >> i) & 1 else 1) * vals[x]
                if y in vals:
                    if vals[y] != v:
                        ok = False
                        break
                else:
                    vals[y] = v
                    todo.append(y)
        if ok and all(vals[G.mul(a, b)] == vals[a] * vals[b] for a in S for b in S):
            out.append(vals)
    return out


def regular_rep(G, S):
    S = sorted(S)
    pos = {s: i for i, s in enumerate(S)}

    def sigma(g):
        M = la.zeros(len(S), len(S))
        for s in S:
            M[pos[G.mul(g, s)]][pos[s]] = 1
        return M
    return len(S), sigma


def _unimodular(rng, d):
    P = la.identity(d)
    for _ in range(d):
        i, j = rng.sample(range(d), 2) if d > 1 else (0, 0)
        if i != j:
            c = rng.choice([-1, 1, 2])
            for r in range(d):
                P[r][j] += c * P[r][i]
    return P


def random_stab_rep(G, S, rng, max_dim=2, allow_regular=True):
    chars = sign_characters(G, S)
    if allow_regular and len(S) > 1 and len(S) <= max_dim + 1 and rng.random() < 0.25:
        d, sigma = regular_rep(G, S)
    else:
        d = rng.randint(0, max_dim)
        picks = [rng.choice(chars) for _ in range(d)]

        def sigma(g, picks=picks):
            return [[picks[i][g] if i == j else 0 for j in range(len(picks))] for i in range(len(picks))]
    if d > 1 and rng.random() < 0.7:
        P = _unimodular(rng, d)
        Pi = la.inverse(P)
        base = sigma

        def sigma(g, base=base):
            return la.matmul(la.matmul(P, base(g), d), Pi, d)
    return d, sigma


def random_bundle(Y, rng, max_dim=2, allow_regular=True):
    reps = []
    for r, _, stab in Y.orbits:
        reps.append(random_stab_rep(Y.group, stab, rng, max_dim, allow_regular))
    V = induced_bundle(Y, reps)
    V.name = "V"
    return V


def random_kernel(Y1, Y2, rng, max_dim=2, allow_regular=True):
    from .groupoid import product
    from .kernelcalc import Kernel
    return Kernel(Y1, Y2, random_bundle(product(Y1, Y2), rng, max_dim, allow_regular), name="K")


def random_dims_kernel(X1, X2, rng, max_dim=3):
    from .kernelcalc import kernel_from_dims
    return kernel_from_dims(X1, X2, [[rng.randint(0, max_dim) for _ in range(X2.m)] for _ in range(X1.m)])


# ---------------------------------------------------------------- Frobenius

def random_frobenius(rng, max_group=8, max_carrier=4):
    """(Y, F) with F an automorphism of Y = X//G built from a group
    automorphism and a theta-compatible bijection of X."""
    G = rng.choice(small_groups(max_group))
    auts = automorphisms(G)
    th = rng.choice(auts)
    subs = subgroups(G)

    def image(H):
        return frozenset(th[h] for h in H)
    orbits_H = []
    size = 0
    for _ in range(rng.randint(1, 2)):
        opts = []
        for H in subs:
            orb = [H]
            while image(orb[-1]) != orb[0]:
                orb.append(image(orb[-1]))
            tot = sum(G.n // len(K) for K in orb)
            if size + tot <= max_carrier:
                opts.append(orb)
        if not opts:
            break
        orb = rng.choice(opts)
        orbits_H.append(orb)
        size += sum(G.n // len(K) for K in orb)
    Hs = [H for orb in orbits_H for H in orb]
    Y = gset_groupoid(G, Hs)
    # u maps gH_j (component j of an orbit) to theta(g) theta(H_j) = component j+1
    comp_index = []
    for orb in orbits_H:
        start = len(comp_index)
        for j in range(len(orb)):
            comp_index.append((start, len(orb), j))
    carrier_pos = {}
    pos = 0
    cosets_all = []
    for i, H in enumerate(Hs):
        cs = coset_space(G, H)
        for c in cs:
            carrier_pos[(i, c)] = pos
            cosets_all.append((i, c))
            pos += 1
    u = []
    for i, c in cosets_all:
        start, L, j = comp_index[i]
        i2 = start + (j + 1) % L
        img = tuple(sorted(th[x] for x in c))
        u.append(carrier_pos[(i2, img)])
    # optionally twist by an element k: F' = (c_k . theta, k.u)
    if rng.random() < 0.5:
        k = rng.randrange(G.n)
        th = tuple(G.prod(k, t, G.inv(k)) for t in th)
        u = [Y.act[k][x] for x in u]
    F = GroupoidMap(Y, Y, th, u, name="Frob")
    return Y, F


def random_discrete_frobenius(rng, max_size=5):
    n = rng.randint(1, max_size)
    X = discrete(list(range(1, n + 1)))
    perm = list(range(n))
    rng.shuffle(perm)
    return X, GroupoidMap(X, X, [0], perm, name="Frob")


# --------------------------------------------------------------------- maps

def random_map(rng, Y1, Y2, name="f"):
    """A random equivariant functor Y1 -> Y2: a homomorphism theta, then for
    each orbit of Y1 an image of its representative fixed by theta(Stab)."""
    G1, G2 = Y1.group, Y2.group
    ths = homomorphisms(G1, G2)
    rng.shuffle(ths)
    for th in ths:
        u = [None] * Y1.m
        ok = True
        for r, _, stab in Y1.orbits:
            opts = [x for x in range(Y2.m) if all(Y2.act[th[s]][x] == x for s in stab)]
            if not opts:
                ok = False
                break
            x = rng.choice(opts)
            for g in range(G1.n):
                u[Y1.act[g][r]] = Y2.act[th[g]][x]
        if ok:
            return GroupoidMap(Y1, Y2, th, u, name=name)
    return None


def random_cospan(rng, max_group=8, max_carrier=4):
    """(f, g) with a common codomain; retries until both legs exist."""
    while True:
        C = random_groupoid(rng, max_group, max_carrier)
        A = random_groupoid(rng, max_group, max_carrier)
        B = random_groupoid(rng, max_group, max_carrier)
        f = random_map(rng, A, C, "f")
        g = random_map(rng, B, C, "g")
        if f is not None and g is not None:
            return f, g


def _coset_maps(G, A, B):
    """All equivariant maps A -> B (same group, theta = id)."""
    out = []
    r = A.orbits[0][0]
    stab = A.orbits[0][2]
    for x in range(B.m):
        if all(B.act[s][x] == x for s in stab):
            u = [None] * A.m
            for g in range(G.n):
                u[A.act[g][r]] = B.act[g][x]
            out.append(GroupoidMap(A, B, range(G.n), u, name="f", check=False))
    return out


def exhaustive_cospans(max_group=8, max_carrier=4):
    """Every cospan A -> C <- B of transitive coset spaces G/H with
    |G/H| <= max_carrier, over the small groups, theta = id."""
    for G in small_groups(max_group):
        spaces = [gset_groupoid(G, [H]) for H in subgroups(G) if G.n // len(H) <= max_carrier]
        for C in spaces:
            legs = [m for A in spaces for m in _coset_maps(G, A, C)]
            for f in legs:
                for g in legs:
                    yield f, g


def sign_line_bundles(Y):
    """Line bundles induced from the sign characters of a transitive Y."""
    r, _, stab = Y.orbits[0]
    G = Y.group
    out = []
    for ch in sign_characters(G, stab):
        out.append(induced_bundle(Y, [(1, lambda g, ch=ch: [[ch[g]]])]))
    return out
