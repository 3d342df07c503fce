"""Walk through traces of kernels and Frobenius fixed points.

Run with ``python3 demos/traces_and_frobenius.py``.
"""
from deskcat import linalg as la
from deskcat.coeff import Matrix, RationalField
from deskcat.corpus import regular_rep
from deskcat.frobenius import WeilSheaf, cl_weil, lt_naive, sfunct, tr_frob
from deskcat.groupoid import GroupoidMap, classifying, cyclic_group, discrete, identity_map, symmetric_group
from deskcat.kernelcalc import identity_kernel, kernel_from_dims, trace_comparison, trace_via_duality
from deskcat.sheafcalc import Bundle, induced_bundle

# A plain matrix is a kernel between points. Its trace is the usual one.
M = Matrix.from_lists([[5, 1], [2, 7]], RationalField())
print("trace of [[5,1],[2,7]]:", trace_via_duality(M))

# Over a discrete groupoid a kernel is a matrix of dimensions.
X = discrete("xy")
D = kernel_from_dims(X, X, [[1, 2], [0, 3]])
via, lt, cmp, ok = trace_comparison(D)
print("discrete kernel: dual trace dim", via.dim, "| naive dim", lt.dim, "| agree:", ok)

# The identity kernel on BS3 has trace spanned by the conjugacy classes.
Y = classifying(symmetric_group(3))
print("trace of identity on BS3 has dim", trace_via_duality(identity_kernel(Y)).dim)

# Fixed points of a Frobenius. Swapping two of three points leaves one fixed.
X3 = discrete([1, 2, 3])
swap = GroupoidMap(X3, X3, [0], [1, 0, 2], name="(1 2)")
print("fixed points of (1 2) on {1,2,3}:", tr_frob(X3, swap).dim)

# A Weil sheaf gives a function on the fixed points. On the fixed point 3 a
# unipotent Jordan block has trace 2.
V = Bundle(X3, [1, 1, 2])
alpha = {0: [[1]], 1: [[1]], 2: [[1, 1], [0, 1]]}
W = WeilSheaf(V, swap, alpha.__getitem__)
sp = tr_frob(X3, swap)
print("sheaf function:", sfunct(W).items(), "| class:", cl_weil(W, sp),
      "| round trip ok:", lt_naive(cl_weil(W, sp), sp) == sfunct(W))

# Regular representation of Z/2: character 2 at the identity, 0 elsewhere.
G = cyclic_group(2)
BG = classifying(G)
R = induced_bundle(BG, [regular_rep(G, range(2))])
f = sfunct(WeilSheaf(R, identity_map(BG), lambda x: la.identity(2)))
print("regular character of Z/2:", f(("*", 0)), f(("*", 1)))
