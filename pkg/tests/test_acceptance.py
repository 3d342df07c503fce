"""The ten acceptance criteria, exact arithmetic throughout.

Run directly (python tests/test_acceptance.py) for one PASS/FAIL line per
criterion; under pytest each criterion is its own test and prints the same line.
"""
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from builders import (boolean_tables, enh_corpus, random_bc_case, random_category, random_dims,  # noqa: E402
                      random_weil, disc)
from oracles import (bc_mate_oracle, conjugacy_class_count, diagonal_sum, mate_invertible,  # noqa: E402
                     twisted_class_count)

from deskcat import enhance, linalg as la  # noqa: E402
from deskcat.coeff import (BooleanQuantale, IntegerRing, RationalField, TropicalQuantale,  # noqa: E402
                           chain_quantale, group_powerset_quantale)
from deskcat.corpus import (exhaustive_cospans, gset_groupoid, random_bundle, random_groupoid, random_kernel, random_map,  # noqa: E402
                            regular_rep, sign_line_bundles, small_groups, subgroups)
from deskcat.enriched import (EnrichedCat, bk_limit, colimit_universal_holds, hom_presheaf,  # noqa: E402
                              is_copresheaf, is_presheaf,
                              lax_module_maps, limit_corpus, limit_universal_holds, module_of_quantale,
                              preserves_meets_top_cotensors, preserves_weighted_limits, presheaves,
                              product_module, weighted_limit, yoneda)
from deskcat.frobenius import WeilSheaf, cl_weil, lt_naive, sfunct, tr_frob  # noqa: E402
from deskcat.groupoid import (GroupoidMap, classifying, cyclic_group, discrete,  # noqa: E402
                              identity_map, iso_comma_square, klein_group, point, symmetric_group)
from deskcat.kernelcalc import (beck_chevalley_check, identity_kernel, kernel_from_dims,  # noqa: E402
                                trace_comparison, trace_lt_ag)
from deskcat.sheafcalc import (base_change_check, induced_bundle, norm_map, omega_map,  # noqa: E402
                               projection_formula_check, trivial_bundle)

QQ = RationalField()


# ---------------------------------------------------------------- 1

def c1_trace_formula():
    rng = random.Random(101)
    n_disc = n_act = 0
    for _ in range(500):
        n = rng.randint(1, 6)
        X = disc(n, "x")
        D = random_dims(rng, n, n, 3)
        K = kernel_from_dims(X, X, D)
        via, lt, M, ok = trace_comparison(K)
        if not ok or lt.dim != diagonal_sum(D):
            return False, f"discrete kernel {D} fails"
        n_disc += 1
    while n_act < 100:
        Y = random_groupoid(rng, 8, 4)
        K = random_kernel(Y, Y, rng, max_dim=1, allow_regular=n_act % 4 == 0)
        via, lt, M, ok = trace_comparison(K)
        if not ok:
            return False, f"action-groupoid kernel on {Y.name} fails"
        n_act += 1
    return True, f"{n_disc} discrete, {n_act} action-groupoid kernels"


# ---------------------------------------------------------------- 2

def _klein_swap():
    K = klein_group()
    th = [K.index((b, a)) for (a, b) in K.labels]
    Y = classifying(K)
    return Y, GroupoidMap(Y, Y, th, [0], name="swap")


def _z3_inversion():
    G = cyclic_group(3)
    Y = classifying(G)
    return Y, GroupoidMap(Y, Y, [G.inv(g) for g in range(3)], [0], name="inv")


def _s3_identity():
    Y = classifying(symmetric_group(3))
    return Y, identity_map(Y)


def _discrete_swap():
    X = discrete([1, 2, 3])
    return X, GroupoidMap(X, X, [0], [1, 0, 2], name="(1 2)")


def _brute_classes(Y, F):
    G = Y.group
    return twisted_class_count(range(G.n), G.mul, lambda g, x: Y.act[g][x], lambda g: F.theta[g],
                               lambda x: F.u[x], range(Y.m))


def c2_frobenius_fixed_points():
    cases = [("(S3, id)", _s3_identity(), 3), ("(Z/3, inversion)", _z3_inversion(), 1),
             ("(Z/2xZ/2, swap)", _klein_swap(), 2), ("({1,2,3}, (1 2))", _discrete_swap(), 1)]
    got = []
    for name, (Y, F), want in cases:
        d = tr_frob(Y, F).dim
        if d != want or _brute_classes(Y, F) != want:
            return False, f"{name}: dim {d}, expected {want}"
        got.append(f"{name}->{d}")
    return True, ", ".join(got)


# ---------------------------------------------------------------- 3

def _unipotent():
    Y = point()
    return WeilSheaf(trivial_bundle(Y, 2), identity_map(Y), lambda x: [[1, 1], [0, 1]], name="unipotent")


def _regular():
    G = cyclic_group(2)
    Y = classifying(G)
    V = induced_bundle(Y, [regular_rep(G, range(2))])
    return WeilSheaf(V, identity_map(Y), lambda x: la.identity(2), name="regular")


def _agrees(W):
    sp = tr_frob(W.Y, W.F)
    a, b = lt_naive(cl_weil(W, sp), sp), sfunct(W)
    return a == b, b


def c3_sheaf_function():
    ok, f = _agrees(_unipotent())
    if not ok or sorted(f.values.values()) != [2]:
        return False, f"unipotent example gives {f.values}"
    ok, f = _agrees(_regular())
    if not ok or sorted(f.values.values()) != [0, 2]:
        return False, f"regular representation gives {f.values}"
    rng = random.Random(303)
    for i in range(200):
        W = random_weil(rng)
        ok, _ = _agrees(W)
        if not ok:
            return False, f"random Weil sheaf #{i} on {W.Y.name} disagrees"
    return True, "unipotent 2, regular (2, 0), 200 random Weil sheaves"


# ---------------------------------------------------------------- 4

def c4_hochschild():
    G = symmetric_group(3)
    sp = trace_lt_ag(identity_kernel(classifying(G)))
    want = conjugacy_class_count(G.mul, range(G.n))
    labels = [b[1] for b in sp.basis]
    conj = {G.labels[g]: frozenset(G.labels[G.prod(h, g, G.inv(h))] for h in range(G.n)) for g in range(G.n)}
    distinct = len({conj[g] for g in labels}) == len(labels)
    ok = sp.dim == 3 == want and distinct
    return ok, f"dim {sp.dim}, classes {want}, basis {list(sp.basis)}"


# ---------------------------------------------------------------- 5

def c5_base_change_projection():
    squares = proj = 0
    legs = set()
    for f, g in exhaustive_cospans(8, 4):
        sq = iso_comma_square(f, g)
        Vs = sign_line_bundles(f.dom)
        for V in Vs:
            ok, w = base_change_check(sq, V)
            if not ok:
                return False, f"base change fails for {f.dom.name} -> {f.cod.name} <- {g.dom.name}: {w}"
            squares += 1
        if (f.dom, f.cod, f.u) not in legs:
            legs.add((f.dom, f.cod, f.u))
            for W in sign_line_bundles(f.cod):
                ok, w = projection_formula_check(f, Vs[-1], W)
                if not ok:
                    return False, f"projection formula fails along {f.dom.name} -> {f.cod.name}: {w}"
                proj += 1
    return True, f"{squares} base-change squares, {proj} projection-formula instances"


# ---------------------------------------------------------------- 6

def corpus_groupoids(max_group=8, max_carrier=4):
    out = []
    for G in small_groups(max_group):
        subs = [H for H in subgroups(G) if G.n // len(H) <= max_carrier]
        for H in subs:
            out.append(gset_groupoid(G, [H]))
        for H in subs:
            for K in subs:
                if G.n // len(H) + G.n // len(K) <= max_carrier:
                    out.append(gset_groupoid(G, [H, K]))
    return out


def c6_tameness():
    Ys = corpus_groupoids()
    for Y in Ys:
        M, inv = omega_map(Y, QQ)
        if not inv:
            return False, f"omega not invertible over Q on {Y.name}"
    M, inv = omega_map(classifying(cyclic_group(2)), IntegerRing())
    ok = (not inv) and M.entries[0][0] == 2
    return ok, f"{len(Ys)} groupoids invertible over Q; pt//Z/2 over Z: norm entry {M.entries[0][0]}, " \
               f"invertible={inv}"


# ---------------------------------------------------------------- 7

def _yoneda_holds(C):
    P = presheaves(C)
    for o in C.objects:
        y = yoneda(C, o)
        for phi in P.elements:
            if hom_presheaf(P, y, phi) != phi[C.index[o]]:
                return False
    return True


def c7_yoneda():
    tables = 0
    cats = []
    for n in range(1, 4):
        for C, ok in boolean_tables(n):
            tables += 1
            if ok:
                cats.append(C)
    for C, ok in boolean_tables(4, fixed_diagonal=True):
        tables += 1
        if ok:
            cats.append(C)
    for C in cats:
        if not _yoneda_holds(C):
            return False, f"Boolean category {C.table} fails"
    rng = random.Random(707)
    T = TropicalQuantale(4)
    for _ in range(200):
        C = random_category(rng, T, rng.randint(1, 3))
        if not _yoneda_holds(C):
            return False, f"tropical category {C.table} fails"
    return True, f"{len(cats)} valid Boolean categories out of {tables} tables, 200 tropical"


# ---------------------------------------------------------------- 8

def _close_covariant(C, d, M):
    d = list(d)
    for _ in range(C.n):
        for i in range(C.n):
            for j in range(C.n):
                d[j] = M.join2(d[j], M.act(C.table[i][j], d[i]))
    return tuple(d)


def _close_weight(C, w, covariant):
    A = C.A
    w = list(w)
    for _ in range(C.n):
        for i in range(C.n):
            for j in range(C.n):
                if covariant:
                    w[j] = A.add(w[j], A.mul(C.table[i][j], w[i]))
                else:
                    w[i] = A.add(w[i], A.mul(w[j], C.table[i][j]))
    return tuple(w)


def _modules(A, rng):
    out = [module_of_quantale(A)]
    if len(A.elements()) ** 2 <= 64:
        out.append(product_module(module_of_quantale(A), module_of_quantale(A)))
    for _ in range(3):
        P = presheaves(random_category(rng, A, rng.randint(1, 2)))
        if len(P) <= 64:
            out.append(P)
    return out


def c8_weighted_limits():
    rng = random.Random(808)
    quantales = [BooleanQuantale(), chain_quantale(), TropicalQuantale(3), group_powerset_quantale(2)]
    mods = {id(A): _modules(A, rng) for A in quantales}
    triples = 0
    for t in range(120):
        A = quantales[t % len(quantales)]
        M = rng.choice(mods[id(A)])
        assert len(M) <= 64
        C = random_category(rng, A, rng.randint(1, 3))
        phi = _close_covariant(C, [rng.choice(M.elements) for _ in range(C.n)], M)
        W = _close_weight(C, [rng.choice(A.elements()) for _ in range(C.n)], True)
        Wp = _close_weight(C, [rng.choice(A.elements()) for _ in range(C.n)], False)
        assert is_copresheaf(C, W) and is_presheaf(C, Wp)
        ok1, _ = limit_universal_holds(C, W, phi, M)
        ok2, _ = colimit_universal_holds(C, Wp, phi, M)
        ok3 = bk_limit(C, W, phi, M) == weighted_limit(C, W, phi, M)
        if not (ok1 and ok2 and ok3):
            return False, f"triple #{t} over {A.name}: limit {ok1}, colimit {ok2}, BK {ok3}"
        triples += 1
    # decomposition in both directions on small modules
    B, Ch = BooleanQuantale(), chain_quantale()
    pairs = [(module_of_quantale(B), module_of_quantale(B)),
             (module_of_quantale(B), product_module(module_of_quantale(B), module_of_quantale(B))),
             (product_module(module_of_quantale(B), module_of_quantale(B)), module_of_quantale(B)),
             (module_of_quantale(Ch), module_of_quantale(Ch)),
             (module_of_quantale(Ch), presheaves(EnrichedCat(Ch, [0], [[2]]))),
             (presheaves(EnrichedCat(Ch, [0], [[2]])), module_of_quantale(Ch))]
    yes = no = 0
    for M, N in pairs:
        assert len(M) <= 6 and len(N) <= 6
        corpus = limit_corpus(M.A, 2)
        for f in lax_module_maps(M, N):
            a = preserves_weighted_limits(f, M, N, corpus)
            b = preserves_meets_top_cotensors(f, M, N)
            if a != b:
                return False, f"decomposition disagrees on a map {M.name} -> {N.name}"
            yes += a
            no += not a
    ok = yes > 0 and no > 0
    return ok, f"{triples} (C, W, Phi) triples; decomposition on {yes + no} maps ({yes} preserve, {no} do not)"


# ---------------------------------------------------------------- 9

def _collapse_instances():
    from deskcat.enhance import LaxFunctorF, build_Enh, discrete_group_poset
    B = BooleanQuantale()
    O = discrete_group_poset(cyclic_group(2))
    good = build_Enh(O, LaxFunctorF(O, B, lambda o: 1))
    broken = build_Enh(O, LaxFunctorF(O, B, lambda o: 1 if o == O.one else 0))
    return good, broken


def c9_enhancement():
    built = ff = 0
    for sn, tn, O, F in enh_corpus():
        R = enhance.build_Enh(O, F)
        built += 1
        if not R.first_req_holds():
            return False, f"first requirement fails for {sn} -> {tn}"
        if F.is_strict_unital():
            ok, rep = enhance.check_strict_unital_ff(R)
            if not ok:
                return False, f"iota not fully faithful for strictly unital {sn} -> {tn}"
            ff += 1
        if not enhance.ambidexterity_conditions(R):
            if not enhance.ambidexterity_holds(R)[0]:
                return False, f"ambidexterity fails under (1)-(3) for {sn} -> {tn}"
    good, broken = _collapse_instances()
    c_good = enhance.check_collapse(good) and enhance.collapse_holds(good)[0]
    c_broken = enhance.collapse_holds(broken)[0]
    ok = ff >= 50 and c_good and not c_broken
    return ok, f"{built} instances, {ff} strictly unital and fully faithful, collapse {c_good}/{c_broken}"


# ---------------------------------------------------------------- 10

def c10_ambidexterity():
    maps = 0
    seen = set()
    for f, g in exhaustive_cospans(8, 4):
        for h in (f, g):
            key = (h.dom, h.cod, h.u)
            if key in seen:
                continue
            seen.add(key)
            for V in sign_line_bundles(h.dom):
                N = norm_map(h, V)
                for y in range(h.cod.m):
                    d = N.source.dim(y)
                    if d != N.target.dim(y) or (d and la.rank(N.at(y)) != d):
                        return False, f"norm map not invertible along {h.dom.name} -> {h.cod.name}"
            maps += 1
    rng = random.Random(1010)
    while maps < len(seen) + 60:
        Y1, Y2 = random_groupoid(rng, 8, 4), random_groupoid(rng, 8, 4)
        h = random_map(rng, Y1, Y2)
        if h is None:
            continue
        N = norm_map(h, random_bundle(Y1, rng))
        for y in range(Y2.m):
            d = N.source.dim(y)
            if d != N.target.dim(y) or (d and la.rank(N.at(y)) != d):
                return False, f"norm map not invertible along a random {Y1.name} -> {Y2.name}"
        maps += 1
    agree = 0
    for i in range(120):
        sq, (F, G, P, Q, gam), (C, B) = random_bc_case(rng)
        ok, info = beck_chevalley_check(sq)
        orc = bc_mate_oracle(F, G, P, Q, gam)
        same = all([[Fraction(x) for x in r] for r in info["mate"][(C.carrier[c], B.carrier[b])]] == orc[(c, b)][0]
                   for (c, b) in orc)
        if not same or ok != mate_invertible(orc):
            return False, f"square #{i}: mate differs from the oracle"
        agree += 1
    return True, f"norm invertible on {maps} maps; {agree} squares agree with the mate oracle"


CRITERIA = [
    (1, "trace formula equivalence", c1_trace_formula),
    (2, "Frobenius fixed points", c2_frobenius_fixed_points),
    (3, "sheaf-function correspondence", c3_sheaf_function),
    (4, "identity-kernel Hochschild check", c4_hochschild),
    (5, "base change and projection formula", c5_base_change_projection),
    (6, "tameness dichotomy", c6_tameness),
    (7, "enriched Yoneda", c7_yoneda),
    (8, "weighted (co)limits and decomposition", c8_weighted_limits),
    (9, "enhancement suite", c9_enhancement),
    (10, "ambidexterity and Beck-Chevalley oracle", c10_ambidexterity),
]


def run(num, title, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {num:>2} {title:<42} {'PASS' if ok else 'FAIL'}  ({time.perf_counter() - t0:.1f}s) {detail}"
    print(line)
    return ok


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, fn):
    assert run(num, title, fn)


if __name__ == "__main__":
    results = [run(*c) for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
