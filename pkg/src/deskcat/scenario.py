"""Scenario files: JSON documents declaring groups, groupoids, maps, bundles,
kernels, Weil sheaves, enriched categories, SM posets and lax functors,
followed by a task list.

Every declaration section is a dict name -> spec. Lists inside labels are
read back as tuples, so permutation labels survive a round trip.
"""
import json
import math
from fractions import Fraction

from .coeff import Matrix, coeff_from_spec
from .enhance import LaxFunctorF, SMPosetO, discrete_group_poset, sm_poset_from_quantale, unit_sm_poset
from .enriched import EnrichedCat
from .frobenius import WeilSheaf, frobenius_kernel
from .groupoid import (FinGroup, FinGroupoid, GroupoidError, GroupoidMap, classifying, cyclic_group,
                       dihedral_group, discrete, klein_group, quaternion_group, symmetric_group)
from .kernelcalc import Kernel, identity_kernel, kernel_from_dims
from .sheafcalc import Bundle, induced_bundle, trivial_bundle

SECTIONS = ("groups", "groupoids", "maps", "bundles", "kernels", "weil", "enriched", "posets", "lax")


class ScenarioError(ValueError):
    """Parse or validation failure (exit code 1)."""


def tup(x):
    if isinstance(x, list):
        return tuple(tup(y) for y in x)
    return x


def num(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def mat(M):
    return [[num(v) for v in row] for row in M]


def show_num(v):
    """Exact values print as "p/q"; tropical infinity as "inf"."""
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"
    if v == math.inf:
        return "inf"
    return v


def show_mat(M):
    return [[str(Fraction(v)) if not isinstance(v, int) else v for v in row] for row in M]


NAMED_GROUPS = {
    "S3": lambda: symmetric_group(3),
    "Q8": quaternion_group,
    "D4": lambda: dihedral_group(4),
    "klein": klein_group,
}


class Scenario:
    def __init__(self, doc, limits=None):
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        self.doc = doc
        self.limits = limits or {}
        self.coeff = coeff_from_spec(doc.get("coeff", "rational"))
        self.env = {}
        self.tasks = doc.get("tasks", [])
        if not isinstance(self.tasks, list):
            raise ScenarioError("tasks must be a list")
        for sec in SECTIONS:
            for name, spec in doc.get(sec, {}).items():
                if name in self.env:
                    raise ScenarioError(f"name {name!r} declared twice")
                try:
                    self.env[name] = getattr(self, "_" + sec)(name, spec)
                except ScenarioError:
                    raise
                except (ValueError, KeyError, TypeError, GroupoidError) as exc:
                    raise ScenarioError(f"invalid declaration {name!r} in {sec}: {exc}") from exc

    def get(self, name, kind=None):
        if name not in self.env:
            raise ScenarioError(f"undeclared name {name!r}")
        obj = self.env[name]
        if kind is not None and not isinstance(obj, kind):
            raise ScenarioError(f"{name!r} is not a {kind.__name__}")
        return obj

    def _limit(self, key, value, what):
        cap = self.limits.get(key)
        if cap is not None and value > cap:
            raise ScenarioError(f"{what} exceeds the {key} limit ({value} > {cap})")

    # --- declarations
    def _groups(self, name, s):
        if isinstance(s, str):
            if s in NAMED_GROUPS:
                G = NAMED_GROUPS[s]()
            elif s.startswith("Z/"):
                G = cyclic_group(int(s[2:]))
            else:
                raise ScenarioError(f"unknown group {s!r}")
        elif "cyclic" in s:
            G = cyclic_group(int(s["cyclic"]))
        else:
            labels = [tup(x) for x in s.get("labels", range(len(s["table"])))]
            G = FinGroup(labels, [[int(v) for v in r] for r in s["table"]], name=s.get("name", name))
        self._limit("group", G.n, f"group {name}")
        return G

    def _groupoids(self, name, s):
        if "discrete" in s:
            Y = discrete([tup(x) for x in s["discrete"]], name=name)
        elif "classifying" in s:
            Y = classifying(self.get(s["classifying"], FinGroup))
            Y.name = name
        else:
            G = self.get(s["group"], FinGroup)
            if "cosets" in s:
                from .corpus import gset_groupoid
                Hs = [frozenset(G.index(tup(h)) for h in H) for H in s["cosets"]]
                for H in Hs:
                    if G.closure(list(H)) != H:
                        raise ScenarioError(f"{name}: coset data is not a subgroup")
                Y = gset_groupoid(G, Hs, name=name)
            else:
                Y = FinGroupoid([tup(x) for x in s["carrier"]], G, [[int(v) for v in r] for r in s["act"]],
                                name=name)
        self._limit("carrier", Y.m, f"groupoid {name}")
        return Y

    def _maps(self, name, s):
        A = self.get(s["dom"], FinGroupoid)
        B = self.get(s["cod"], FinGroupoid)
        theta = s.get("theta")
        if theta is None:
            if A.group != B.group:
                raise ScenarioError(f"{name}: theta omitted but the groups differ")
            theta = list(range(A.group.n))
        u = s.get("u")
        if u is None:
            if A.carrier != B.carrier:
                raise ScenarioError(f"{name}: u omitted but the carriers differ")
            u = list(range(A.m))
        return GroupoidMap(A, B, [int(t) for t in theta], [int(x) for x in u], name=name)

    def _bundles(self, name, s):
        Y = self.get(s["on"], FinGroupoid)
        if "trivial" in s:
            V = trivial_bundle(Y, int(s["trivial"]))
        elif "orbits" in s:
            reps = []
            for k, o in enumerate(s["orbits"]):
                d = int(o["dim"])
                stab = Y.orbits[k][2]
                table = {int(g): mat(M) for g, M in o.get("stab", {}).items()}
                for g in stab:
                    table.setdefault(g, [[1 if i == j else 0 for j in range(d)] for i in range(d)])
                reps.append((d, table.__getitem__))
            V = induced_bundle(Y, reps)
        else:
            dims = [int(d) for d in s["dims"]]
            rho = [[mat(M) for M in row] for row in s["rho"]]
            V = Bundle(Y, dims, lambda g, x: rho[g][x])
        V.name = name
        for x in range(Y.m):
            self._limit("stalk", V.dim(x), f"bundle {name}")
        V.validate()
        return V

    def _kernels(self, name, s):
        if "matrix" in s:
            return Matrix.from_lists(s["matrix"], self.coeff, rows=s.get("rows"), cols=s.get("cols"))
        if "identity" in s:
            return identity_kernel(self.get(s["identity"], FinGroupoid))
        if "frobenius" in s:
            return frobenius_kernel(self.get(s["on"], FinGroupoid), self.get(s["frobenius"], GroupoidMap))
        L = self.get(s["left"], FinGroupoid)
        R = self.get(s["right"], FinGroupoid)
        if "dims" in s:
            return kernel_from_dims(L, R, [[int(v) for v in r] for r in s["dims"]], name)
        return Kernel(L, R, self.get(s["bundle"], Bundle), name=name)

    def _weil(self, name, s):
        V = self.get(s["bundle"], Bundle)
        F = self.get(s["frobenius"], GroupoidMap)
        alpha = [mat(M) for M in s["alpha"]]
        return WeilSheaf(V, F, lambda x: alpha[x], name=name)

    def _enriched(self, name, s):
        A = coeff_from_spec(s.get("coeff", self.doc.get("coeff", "boolean")))
        return EnrichedCat(A, [tup(o) for o in s["objects"]], s["hom"], name=name)

    def _posets(self, name, s):
        if s == "unit":
            return unit_sm_poset()
        if "quantale" in s:
            return sm_poset_from_quantale(coeff_from_spec(s["quantale"]), name=name)
        if "group" in s:
            return discrete_group_poset(self.get(s["group"], FinGroup), name=name)
        objs = [tup(o) for o in s["objects"]]
        tens = {(tup(a), tup(b)): tup(c) for a, b, c in s["tensor"]}
        leq = {(tup(a), tup(b)) for a, b in s.get("leq", [])}
        duals = {tup(a): tup(b) for a, b in s["duals"]} if "duals" in s else None
        return SMPosetO(objs, leq, tens, tup(s["unit"]), duals, name=name)

    def _lax(self, name, s):
        O = self.get(s["source"], SMPosetO)
        A = coeff_from_spec(s["target"])
        vals = {tup(o): A.coerce(v) for o, v in s["values"]}
        return LaxFunctorF(O, A, vals, name=name)


def load(path, limits=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return Scenario(doc, limits)


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, default=str) + "\n"


# --- serializers used for counterexamples

def group_doc(G):
    return {"labels": [G.labels[i] for i in range(G.n)], "table": [list(r) for r in G.table], "name": G.name}


def groupoid_doc(Y, gname):
    return {"group": gname, "carrier": list(Y.carrier), "act": [list(r) for r in Y.act]}


def map_doc(f, dom, cod):
    return {"dom": dom, "cod": cod, "theta": list(f.theta), "u": list(f.u)}


def bundle_doc(V, on):
    Y = V.base
    return {"on": on, "dims": [V.dim(x) for x in range(Y.m)],
            "rho": [[show_mat(V.rho(g, x)) for x in range(Y.m)] for g in range(Y.group.n)]}
