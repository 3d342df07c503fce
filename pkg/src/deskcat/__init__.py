"""deskcat: finite, exact models of sheaf-theoretic trace formulas.

Submodules
----------
coeff       coefficient systems (rationals, integers, quantales) and labeled matrices
groupoid    finite groups and action groupoids X//G
sheafcalc   equivariant bundles, pull/push, base change
kernelcalc  kernels, convolution, traces, adjoints, Beck-Chevalley
frobenius   Weil sheaves and the sheaf-function dictionary
enriched    quantale-enriched categories, presheaves, weighted (co)limits
enhance     the enhancement Enh(O, A) and its ambidexterity checks
cli         scenario runner and self-test
"""
from . import coeff, groupoid, linalg, sheafcalc, kernelcalc, frobenius, enriched, enhance  # noqa: F401

__version__ = "0.1.0"
