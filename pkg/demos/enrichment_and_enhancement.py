"""Small tour of quantale-enriched categories and the enhancement construction.

Run with ``python3 demos/enrichment_and_enhancement.py``.
"""
import math

from deskcat.coeff import BooleanQuantale, TropicalQuantale, chain_quantale, group_powerset_quantale
from deskcat.enhance import (LaxFunctorF, build_Enh, build_enh, check_collapse, check_strict_unital_ff,
                             discrete_group_poset, sm_poset_from_quantale)
from deskcat.enriched import (EnrichedCat, EnrichedError, LaxMap, change_enrichment, hom_presheaf, presheaves,
                              underlying_category, yoneda)
from deskcat.groupoid import cyclic_group

B, T9, Ch = BooleanQuantale(), TropicalQuantale(9), chain_quantale()

# Boolean enrichment is a preorder. Here a <= b <= c.
C = EnrichedCat(B, "abc", [[1, 1, 1], [0, 1, 1], [0, 0, 1]])
print("arrows:", sorted(underlying_category(C)))
P = presheaves(C)
print("presheaves (downsets):", P.elements)
phi = P.elements[-1]
print("Yoneda: hom(y(b), phi) =", hom_presheaf(P, yoneda(C, "b"), phi), "= phi(b) =", phi[1])

# Dropping transitivity is caught, with a witness.
try:
    EnrichedCat(B, "abc", [[1, 1, 0], [0, 1, 1], [0, 0, 1]])
except EnrichedError as e:
    print("rejected:", e.witness)

# Change of base from truth values to distances.
F = LaxMap(B, T9, {1: 0, 0: math.inf})
print("as a metric:", change_enrichment(F, C).table)

# Enhancement: a lax functor O -> A turns O into an A-category.
O = sm_poset_from_quantale(B)
E = build_enh(O, LaxFunctorF(O, T9, {1: 0, 0: math.inf}))
print("enhanced homs:", E.table)

# Lifting the unit breaks full faithfulness, and the report says where.
O3 = sm_poset_from_quantale(Ch)
R = build_Enh(O3, LaxFunctorF(O3, Ch, {0: 0, 1: 2, 2: 2}))
ok, rep = check_strict_unital_ff(R)
print("strictly unital and ff:", ok, "| first distortion:", rep["distortion"][0])

# Over a group with a strict functor the enhancement collapses onto A.
G = discrete_group_poset(cyclic_group(3))
A = group_powerset_quantale(3)
R = build_Enh(G, LaxFunctorF(G, A, {g: frozenset([g]) for g in G.objects}))
print("collapse over Z/3:", check_collapse(R))
