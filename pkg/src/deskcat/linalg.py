"""Exact dense linear algebra over the rationals.

Matrices are lists of rows; entries are ints or Fractions. Nothing here ever
rounds. Elimination runs on integer rows (content-reduced Gauss-Jordan) and
only divides once at the end.
"""
from fractions import Fraction
from math import gcd, lcm


def normalize(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def shape(A, ncols=None):
    return len(A), (len(A[0]) if A else (ncols or 0))


def transpose(A, ncols=0):
    if not A:
        return [[] for _ in range(ncols)]
    return [list(col) for col in zip(*A)]


def matmul(A, B, ncols=0):
    """A @ B. ``ncols`` gives the column count when B has no rows."""
    if not A:
        return []
    if not B:
        return [[0] * ncols for _ in A]
    Bt = list(zip(*B))
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        out.append([normalize(sum(a * col[k] for k, a in nz)) if nz else 0 for col in Bt])
    return out


def matvec(A, v):
    return [normalize(sum(a * b for a, b in zip(row, v) if a)) for row in A]


def add(A, B):
    return [[normalize(a + b) for a, b in zip(r, s)] for r, s in zip(A, B)]


def sub(A, B):
    return [[normalize(a - b) for a, b in zip(r, s)] for r, s in zip(A, B)]


def scale(c, A):
    return [[normalize(c * a) for a in r] for r in A]


def kron(A, B):
    out = []
    for ra in A:
        for rb in B:
            out.append([normalize(a * b) for a in ra for b in rb])
    return out


def kron_vec(u, v):
    return [normalize(a * b) for a in u for b in v]


def direct_sum(blocks):
    """Block diagonal matrix; blocks are (matrix, rows, cols) or plain square lists."""
    blocks = [b if isinstance(b, tuple) else (b, len(b), len(b)) for b in blocks]
    m = sum(b[1] for b in blocks)
    n = sum(b[2] for b in blocks)
    out = zeros(m, n)
    i0 = j0 = 0
    for B, r, c in blocks:
        for i in range(r):
            for j in range(c):
                out[i0 + i][j0 + j] = B[i][j]
        i0 += r
        j0 += c
    return out


def trace(A):
    return normalize(sum(A[i][i] for i in range(len(A))))


def is_zero(A):
    return all(not a for r in A for a in r)


def is_identity(A):
    return all(a == (1 if i == j else 0) for i, r in enumerate(A) for j, a in enumerate(r)) and \
        all(len(r) == len(A) for r in A)


def _int_row(row):
    den = 1
    for a in row:
        if isinstance(a, Fraction):
            den = lcm(den, a.denominator)
    if den == 1:
        return [int(a) for a in row]
    return [int(a * den) for a in row]


def _reduce(row):
    g = 0
    for a in row:
        if a:
            g = gcd(g, a)
            if g == 1:
                return row
    if g > 1:
        return [a // g for a in row]
    return row


def rref(A, ncols=None, col_order=None):
    """Reduced row echelon form.

    Returns (R, pivots) where R holds the nonzero rows (Fractions, pivot
    entries 1) and pivots lists the pivot column of each row. Columns are
    scanned in ``col_order`` (default left to right).
    """
    n = len(A[0]) if A else (ncols or 0)
    M = [_reduce(_int_row(r)) for r in A if any(r)]
    order = range(n) if col_order is None else col_order
    pivots = []
    cur = 0
    for j in order:
        if cur >= len(M):
            break
        p = next((r for r in range(cur, len(M)) if M[r][j]), None)
        if p is None:
            continue
        M[cur], M[p] = M[p], M[cur]
        prow = M[cur]
        pv = prow[j]
        for i in range(len(M)):
            if i != cur and M[i][j]:
                f = M[i][j]
                M[i] = _reduce([a * pv - b * f for a, b in zip(M[i], prow)])
        pivots.append(j)
        cur += 1
    R = []
    for i, j in enumerate(pivots):
        pv = M[i][j]
        R.append([normalize(Fraction(a, pv)) for a in M[i]])
    return R, pivots


def rank(A):
    return len(rref(A)[1])


def nullspace(A, ncols=None, col_order=None):
    """Basis of {v : A v = 0}; each vector has a 1 at its own free column and
    0 at every other free column."""
    n = len(A[0]) if A else (ncols or 0)
    R, pivots = rref(A, n, col_order)
    pset = set(pivots)
    order = list(range(n)) if col_order is None else list(col_order)
    basis = []
    for f in order:
        if f in pset:
            continue
        v = [0] * n
        v[f] = 1
        for row, p in zip(R, pivots):
            if row[f]:
                v[p] = normalize(-row[f])
        basis.append(v)
    return basis


def nullspace_free(A, ncols=None):
    """(basis, free columns) with basis[i] having a 1 at free[i]."""
    n = len(A[0]) if A else (ncols or 0)
    R, pivots = rref(A, n)
    pset = set(pivots)
    free = [j for j in range(n) if j not in pset]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for row, p in zip(R, pivots):
            if row[f]:
                v[p] = normalize(-row[f])
        basis.append(v)
    return basis, free


def free_columns(A, ncols=None):
    n = len(A[0]) if A else (ncols or 0)
    _, pivots = rref(A, n)
    pset = set(pivots)
    return [j for j in range(n) if j not in pset]


def inverse(A):
    n = len(A)
    if any(len(r) != n for r in A):
        return None
    aug = [list(r) + e for r, e in zip(A, identity(n))]
    R, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        return None
    return [[normalize(a) for a in row[n:]] for row in R[:n]]


def solve(A, b):
    """One solution x of A x = b, or None."""
    m = len(A)
    n = len(A[0]) if A else 0
    aug = [list(A[i]) + [b[i]] for i in range(m)]
    R, pivots = rref(aug, n + 1)
    if n in pivots:
        return None
    x = [0] * n
    for row, p in zip(R, pivots):
        x[p] = normalize(row[n])
    return x


def columns(A, ncols=None):
    return transpose(A, ncols or 0)


def from_columns(cols, nrows):
    if not cols:
        return [[] for _ in range(nrows)]
    return [list(r) for r in zip(*cols)]
