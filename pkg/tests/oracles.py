"""Brute-force reference computations, written without the library's
bundle machinery. Everything here works on plain lists and dicts."""
from fractions import Fraction
from itertools import product


def matrix_product(A, B):
    return [[sum(a * b for a, b in zip(r, c)) for c in zip(*B)] for r in A]


def diagonal_sum(M):
    return sum(Fraction(M[i][i]) for i in range(len(M)))


def orbit_count(points, moves):
    """Number of classes of the equivalence generated by x ~ m(x)."""
    parent = {p: p for p in points}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p
    for p in points:
        for m in moves:
            a, b = find(p), find(m(p))
            if a != b:
                parent[a] = b
    return len({find(p) for p in points})


def conjugacy_class_count(mul, elements):
    inv = {g: next(h for h in elements if mul(g, h) == mul(h, g) and _is_e(mul, mul(g, h), elements))
           for g in elements}
    return orbit_count(list(elements), [lambda x, h=h: mul(mul(h, x), inv[h]) for h in elements])


def _is_e(mul, e, elements):
    return all(mul(e, g) == g for g in elements)


def twisted_class_count(elements, mul, act, theta, u, carrier):
    """Pairs (x, g) with g.u(x) = x, modulo h.(x, g) = (h.x, h g theta(h)^-1)."""
    e = next(g for g in elements if _is_e(mul, g, elements))
    inv = {g: next(h for h in elements if mul(g, h) == e) for g in elements}
    pts = [(x, g) for x in carrier for g in elements if act(g, u(x)) == x]
    moves = [lambda p, h=h: (act(h, p[0]), mul(mul(h, p[1]), inv[theta(h)])) for h in elements]
    return orbit_count(pts, moves)


def bc_mate_oracle(F, G, P, Q, gamma):
    """Mate of a square of discrete kernels, computed on matrices of spaces.

    A --f--> B, p: A -> C, g: B -> D, q: C -> D. F, G, P, Q are dimension
    matrices and gamma[(a, d)] is the matrix of the 2-cell
    sum_b f(a,b) (x) g(b,d) -> sum_c p(a,c) (x) q(c,d) (blocks ordered by the
    middle index, tensor factors in lexicographic order).

    Returns {(c, b): (M, source dim, target dim)} with M: sum_a p(a,c)* (x) f(a,b) -> sum_d q(c,d) (x) g(b,d)*.
    The right adjoint of a discrete kernel is its transpose with dual bases,
    unit 1 |-> sum e_j (x) e_j*, counit the evaluation pairing.
    """
    nA, nB, nC, nD = len(F), len(G), len(Q), len(Q[0]) if Q else 0
    nD = len(G[0]) if G else nD

    def offs(sizes):
        out, acc = [], 0
        for s in sizes:
            out.append(acc)
            acc += s
        return out
    out = {}
    for c in range(nC):
        for b in range(nB):
            src = [P[a][c] * F[a][b] for a in range(nA)]
            tgt = [Q[c][d] * G[b][d] for d in range(nD)]
            so, to = offs(src), offs(tgt)
            M = [[Fraction(0)] * sum(src) for _ in range(sum(tgt))]
            for a in range(nA):
                for d in range(nD):
                    gam = gamma[(a, d)]
                    in_off = offs([F[a][bb] * G[bb][d] for bb in range(nB)])
                    out_off = offs([P[a][cc] * Q[cc][d] for cc in range(nC)])
                    for i, k in product(range(P[a][c]), range(F[a][b])):
                        col = so[a] + i * F[a][b] + k
                        for l, j in product(range(Q[c][d]), range(G[b][d])):
                            row = to[d] + l * G[b][d] + j
                            r = out_off[c] + i * Q[c][d] + l
                            s = in_off[b] + k * G[b][d] + j
                            M[row][col] = Fraction(gam[r][s])
            out[(c, b)] = (M, sum(src), sum(tgt))
    return out


def rank(M):
    M = [list(map(Fraction, r)) for r in M]
    rk = 0
    cols = len(M[0]) if M else 0
    for col in range(cols):
        piv = next((r for r in range(rk, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        for r in range(len(M)):
            if r != rk and M[r][col] != 0:
                f = M[r][col] / M[rk][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rk])]
        rk += 1
    return rk


def mate_invertible(mates):
    return all(ns == nt and (ns == 0 or rank(M) == ns) for M, ns, nt in mates.values())
