"""deskcat command line: run scenario files and the randomized self-test.

    deskcat run scenario.json [--json] [--parallel] [--limits carrier=64,group=128]
    deskcat selftest [--corpus-size N] [--seed S]

Exit codes: 0 ok, 1 input error, 2 law failure or expectation mismatch.
Default limits can be overridden through DESKCAT_LIMITS (same syntax as --limits).
"""
import argparse
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import enhance, frobenius, kernelcalc
from . import linalg as la
from . import scenario as sc
from .coeff import Matrix, TropicalQuantale, BooleanQuantale, chain_quantale
from .corpus import random_bundle, random_cospan, random_frobenius, random_groupoid, random_kernel
from .enriched import EnrichedCat, LaxMap, hom_presheaf, presheaves, yoneda
from .groupoid import FinGroupoid, GroupoidMap, discrete, iso_comma_square, twisted_fixed_points
from .sheafcalc import Bundle, base_change_check, norm_map, omega_map, projection_formula_check

DEFAULT_LIMITS = {"carrier": 64, "group": 128, "stalk": 16, "presheaf": 2 ** 16}


def parse_limits(text, base=None):
    out = dict(base or DEFAULT_LIMITS)
    if not text:
        return out
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        k, _, v = part.partition("=")
        k = k.strip()
        if k not in DEFAULT_LIMITS or not v.strip().isdigit():
            raise sc.ScenarioError(f"bad limit {part!r}; known keys: {', '.join(sorted(DEFAULT_LIMITS))}")
        out[k] = int(v)
    return out


# ------------------------------------------------------------------ tasks

def _dims(K):
    return K.dim_matrix()


def t_convolve(S, a, b):
    A, B = S.get(a), S.get(b)
    if isinstance(A, Matrix):
        AB = A @ B
        # quantale entries stay as they are; ring entries print as p/q
        show = (lambda v: v) if getattr(AB.coeff, "is_quantale", False) else sc.show_num
        return {"matrix": [[show(v) for v in r] for r in AB.entries]}
    return {"dims": _dims(kernelcalc.convolve(A, B))}


def t_associativity(S, a, b, c):
    A, B, C = S.get(a), S.get(b), S.get(c)
    try:
        L = kernelcalc.convolve(kernelcalc.convolve(A, B), C)
        R = kernelcalc.convolve(A, kernelcalc.convolve(B, C))
    except (kernelcalc.FootMismatch, ValueError) as exc:
        return {"ok": False, "witness": str(exc)}
    dl, dr = _dims(L), _dims(R)
    if dl != dr:
        return {"ok": False, "witness": {"left": dl, "right": dr}}
    return {"ok": True, "dims": dl}


def t_conv_product(S, a, b):
    A, B = S.get(a), S.get(b)
    try:
        got = _dims(kernelcalc.convolve(A, B))
    except (kernelcalc.FootMismatch, ValueError) as exc:
        return {"ok": False, "witness": str(exc)}
    want = [[sum(x * y for x, y in zip(r, c)) for c in zip(*_dims(B))] for r in _dims(A)]
    return {"ok": got == want, "dims": got}


def t_trace(S, k):
    K = S.get(k)
    if isinstance(K, Matrix):
        return {"value": sc.show_num(Fraction(kernelcalc.trace_lt_ag(K)))}
    sp = kernelcalc.trace_lt_ag(K)
    return {"dim": sp.dim, "basis": list(sp.basis)}


def t_trace_comparison(S, k):
    via, lt, M, ok = kernelcalc.trace_comparison(S.get(k))
    return {"ok": ok, "dim": lt.dim, "dim_via": via.dim}


def t_tr_frob(S, y, f):
    Y, F = S.get(y, FinGroupoid), S.get(f, GroupoidMap)
    sp = frobenius.tr_frob(Y, F)
    n = len(twisted_fixed_points(Y, F).orbits)
    return {"ok": sp.dim == n, "dim": sp.dim, "basis": list(sp.basis)}


def t_omega(S, y):
    M, inv = omega_map(S.get(y, FinGroupoid), S.coeff)
    return {"invertible": inv, "diagonal": [sc.show_num(M.entries[i][i]) for i in range(len(M.rows))]}


def t_base_change(S, f, g, v):
    ok, w = base_change_check(iso_comma_square(S.get(f, GroupoidMap), S.get(g, GroupoidMap)), S.get(v, Bundle))
    return {"ok": ok, "witness": w}


def t_projection(S, f, v, w):
    ok, wit = projection_formula_check(S.get(f, GroupoidMap), S.get(v, Bundle), S.get(w, Bundle))
    return {"ok": ok, "witness": wit}


def t_norm(S, f, v):
    N = norm_map(S.get(f, GroupoidMap), S.get(v, Bundle))
    Y = N.source.base
    ok = all(N.source.dim(y) == N.target.dim(y) and (not N.source.dim(y) or la.rank(N.at(y)) == N.source.dim(y))
             for y in range(Y.m))
    return {"ok": ok}


def t_yoneda(S, c):
    C = S.get(c, EnrichedCat)
    P = presheaves(C, S.limits.get("presheaf"))
    for o in C.objects:
        y = yoneda(C, o)
        for phi in P.elements:
            if hom_presheaf(P, y, phi) != phi[C.index[o]]:
                return {"ok": False, "witness": {"object": o, "presheaf": list(phi)}}
    return {"ok": True, "presheaves": len(P)}


def _enh(S, f):
    F = S.get(f, LaxMap)
    return enhance.build_Enh(F.A1, F, S.limits.get("presheaf"))


def t_build_enh(S, f):
    R = _enh(S, f)
    return {"objects": list(R.enh.objects), "hom": [list(r) for r in R.enh.table], "size": len(R.Enh)}


def t_enh_laws(S, f):
    R = _enh(S, f)
    return {"ok": R.first_req_holds() and enhance.yoneda_on_representables(R) and enhance.day_unit_laws(R)}


def t_strict_unital_ff(S, f):
    ok, rep = enhance.check_strict_unital_ff(_enh(S, f))
    return {"holds": ok, "strict_unital": rep["strict_unital"], "distortion": rep["distortion"][:5]}


def t_collapse(S, f):
    R = _enh(S, f)
    holds, _ = enhance.collapse_holds(R)
    conds = [c for c, _ in enhance.collapse_conditions(R)]
    return {"holds": holds, "violated": conds, "ok": holds == (not conds)}


def t_ambidexterity(S, f):
    R = _enh(S, f)
    holds, _ = enhance.ambidexterity_holds(R)
    conds = [c for c, _ in enhance.ambidexterity_conditions(R)]
    return {"holds": holds, "violated": conds, "ok": holds or bool(conds)}


def t_beck_chevalley(S, f, g, p, q):
    sq = kernelcalc.BCSquare(S.get(f), S.get(g), S.get(p), S.get(q))
    try:
        ok, info = kernelcalc.beck_chevalley_check(sq)
    except kernelcalc.AdjointMissing as exc:
        return {"ok": False, "adjoint_missing": str(exc)}
    return {"ok": ok, "failure": info["failure"]}


def t_sheaf_function(S, w):
    W = S.get(w, frobenius.WeilSheaf)
    sp = frobenius.tr_frob(W.Y, W.F)
    a = frobenius.lt_naive(frobenius.cl_weil(W, sp), sp)
    b = frobenius.sfunct(W)
    return {"ok": a.values == b.values, "values": {str(k): sc.show_num(v) for k, v in b.values.items()}}


TASKS = {
    "convolve": t_convolve, "associativity": t_associativity, "conv_product": t_conv_product,
    "trace": t_trace, "trace_comparison": t_trace_comparison, "tr_frob": t_tr_frob, "omega": t_omega,
    "base_change": t_base_change, "projection_formula": t_projection, "norm": t_norm,
    "yoneda": t_yoneda, "build_enh": t_build_enh, "enh_laws": t_enh_laws,
    "strict_unital_ff": t_strict_unital_ff, "collapse": t_collapse, "ambidexterity": t_ambidexterity,
    "beck_chevalley": t_beck_chevalley, "sheaf_function": t_sheaf_function,
}


def _plain(x):
    """JSON-safe copy; infinity (tropical bottom) becomes "inf"."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return json.loads(json.dumps(x, default=str))


def run_task(S, task, timing=False):
    op = task.get("op")
    if op not in TASKS:
        raise sc.ScenarioError(f"unknown task {op!r}")
    args = task.get("args", [])
    for a in args:
        S.get(a)
    t0 = time.perf_counter()
    res = _plain(TASKS[op](S, *args))
    dt = time.perf_counter() - t0
    out = {"op": op, "args": args, "result": res}
    diffs = []
    if "expect" in task:
        for k, v in sorted(_plain(task["expect"]).items()):
            if res.get(k) != v:
                diffs.append(f"{op}{tuple(args)}.{k}: expected {json.dumps(v)}, got {json.dumps(res.get(k))}")
    law_fail = res.get("ok") is False
    out["status"] = "fail" if (diffs or law_fail) else "ok"
    if diffs:
        out["diff"] = diffs
    if timing:
        out["seconds"] = round(dt, 6)
    return out


def run_scenario(path, json_out=False, parallel=False, limits=None, timing=False, stream=None):
    """Returns (exit code, report dict)."""
    stream = stream or sys.stdout
    try:
        S = sc.load(path, limits or DEFAULT_LIMITS)
        for t in S.tasks:
            if t.get("op") not in TASKS:
                raise sc.ScenarioError(f"unknown task {t.get('op')!r}")
            for a in t.get("args", []):
                S.get(a)
    except sc.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, None
    try:
        if parallel and len(S.tasks) > 1:
            with ThreadPoolExecutor() as ex:
                rows = list(ex.map(lambda t: run_task(S, t, timing or not json_out), S.tasks))
        else:
            rows = [run_task(S, t, timing or not json_out) for t in S.tasks]
    except sc.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, None
    except Exception as exc:  # library-side law violations
        print(f"law violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2, None
    failed = [r for r in rows if r["status"] != "ok"]
    report = {"tasks": rows, "status": "fail" if failed else "ok"}
    if json_out:
        stream.write(sc.dumps(report))
    else:
        for r in rows:
            res = json.dumps(r["result"], sort_keys=True)
            if len(res) > 100:
                res = res[:97] + "..."
            stream.write(f"{r['op']:<18} {','.join(r['args']):<16} {r['status']:<5} "
                         f"{1000 * r['seconds']:8.2f} ms  {res}\n")
        stream.write(f"{len(rows)} task(s), {len(failed)} failed\n")
    for r in failed:
        for d in r.get("diff", []):
            print(d, file=sys.stderr)
    return (2 if failed else 0), report


# --------------------------------------------------------------- selftest

class Prop:
    def __init__(self, name, gen, check, shrink=None, to_doc=None):
        self.name, self.gen, self.check = name, gen, check
        self.shrink = shrink or (lambda case: [])
        self.to_doc = to_doc


def _disc(n, tag):
    return discrete([f"{tag}{i}" for i in range(n)], name=tag)


def _gen_chain(rng, k=3):
    sizes = [rng.randint(1, 4) for _ in range(k + 1)]
    return [[[rng.randint(0, 2) for _ in range(sizes[i + 1])] for _ in range(sizes[i])] for i in range(k)]


def _chain_kernels(case):
    Xs = [_disc(len(case[0]), "X0")] + [_disc(len(case[i][0]) if case[i] else 0, f"X{i + 1}")
                                         for i in range(len(case))]
    return [kernelcalc.kernel_from_dims(Xs[i], Xs[i + 1], case[i], name=f"K{i + 1}") for i in range(len(case))]


def _shrink_chain(case):
    # drop one element of an inner or outer set, or lower an entry
    out = []
    nsets = len(case) + 1
    for s in range(nsets):
        size = len(case[0]) if s == 0 else len(case[s - 1][0])
        if size <= 1:
            continue
        for i in range(size):
            new = [[list(r) for r in M] for M in case]
            if s < len(case):
                del new[s][i]
            if s > 0:
                for r in new[s - 1]:
                    del r[i]
            out.append(new)
    for k, M in enumerate(case):
        for i, r in enumerate(M):
            for j, v in enumerate(r):
                if v > 0:
                    new = [[list(r2) for r2 in M2] for M2 in case]
                    new[k][i][j] = v - 1
                    out.append(new)
    return out


def _chain_doc(case, op):
    n = [len(case[0])] + [len(M[0]) for M in case]
    doc = {"groupoids": {f"X{i}": {"discrete": [f"X{i}{j}" for j in range(n[i])]} for i in range(len(n))},
           "kernels": {f"K{i + 1}": {"left": f"X{i}", "right": f"X{i + 1}", "dims": M} for i, M in enumerate(case)},
           "tasks": [{"op": op, "args": [f"K{i + 1}" for i in range(len(case))], "expect": {"ok": True}}]}
    return doc


def _chk_assoc(case):
    A, B, C = _chain_kernels(case)
    try:
        L = kernelcalc.convolve(kernelcalc.convolve(A, B), C)
        R = kernelcalc.convolve(A, kernelcalc.convolve(B, C))
    except (kernelcalc.FootMismatch, ValueError) as exc:
        return False, str(exc)
    return (L.dim_matrix() == R.dim_matrix()), {"left": L.dim_matrix(), "right": R.dim_matrix()}


def _chk_product(case):
    A, B = _chain_kernels(case)
    try:
        got = kernelcalc.convolve(A, B).dim_matrix()
    except (kernelcalc.FootMismatch, ValueError) as exc:
        return False, str(exc)
    want = [[sum(x * y for x, y in zip(r, c)) for c in zip(*case[1])] for r in case[0]]
    return got == want, {"got": got, "want": want}


def _gen_trace(rng):
    if rng.random() < 0.8:
        n = rng.randint(1, 6)
        return ("discrete", [[rng.randint(0, 2) for _ in range(n)] for _ in range(n)])
    Y = random_groupoid(rng, 8, 3)
    return ("action", random_kernel(Y, Y, rng, max_dim=1, allow_regular=False))


def _chk_trace(case):
    kind, data = case
    if kind == "discrete":
        X = _disc(len(data), "X")
        K = kernelcalc.kernel_from_dims(X, X, data)
    else:
        K = data
    via, lt, M, ok = kernelcalc.trace_comparison(K)
    return ok, {"dim_via": via.dim, "dim_lt": lt.dim}


def _shrink_trace(case):
    kind, data = case
    if kind != "discrete" or len(data) <= 1:
        return []
    out = []
    for i in range(len(data)):
        out.append(("discrete", [[v for j, v in enumerate(r) if j != i] for k, r in enumerate(data) if k != i]))
    return out


def _trace_doc(case):
    kind, data = case
    if kind == "discrete":
        return {"groupoids": {"X": {"discrete": [f"x{i}" for i in range(len(data))]}},
                "kernels": {"K": {"left": "X", "right": "X", "dims": data}},
                "tasks": [{"op": "trace_comparison", "args": ["K"], "expect": {"ok": True}}]}
    K = data
    P = K.bundle.base
    return {"groups": {"G": sc.group_doc(K.left.group), "GG": sc.group_doc(P.group)},
            "groupoids": {"Y": sc.groupoid_doc(K.left, "G"), "P": sc.groupoid_doc(P, "GG")},
            "bundles": {"V": sc.bundle_doc(K.bundle, "P")},
            "kernels": {"K": {"left": "Y", "right": "Y", "bundle": "V"}},
            "tasks": [{"op": "trace_comparison", "args": ["K"], "expect": {"ok": True}}]}


def _gen_bc(rng):
    f, g = random_cospan(rng, 8, 3)
    return f, g, random_bundle(f.dom, rng, max_dim=1, allow_regular=False)


def _chk_bc(case):
    f, g, V = case
    return base_change_check(iso_comma_square(f, g), V)


def _bc_doc(case):
    f, g, V = case
    A, B, C = f.dom, g.dom, f.cod
    return {"groups": {"GA": sc.group_doc(A.group), "GB": sc.group_doc(B.group), "GC": sc.group_doc(C.group)},
            "groupoids": {"A": sc.groupoid_doc(A, "GA"), "B": sc.groupoid_doc(B, "GB"),
                          "C": sc.groupoid_doc(C, "GC")},
            "maps": {"f": sc.map_doc(f, "A", "C"), "g": sc.map_doc(g, "B", "C")},
            "bundles": {"V": sc.bundle_doc(V, "A")},
            "tasks": [{"op": "base_change", "args": ["f", "g", "V"], "expect": {"ok": True}}]}


def _gen_tropical_cat(rng, cap=4):
    A = TropicalQuantale(cap)
    n = rng.randint(1, 3)
    d = [[A.one if i == j else rng.choice(A.elements()) for j in range(n)] for i in range(n)]
    changed = True
    while changed:
        changed = False
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = A.add(d[i][j], A.mul(d[i][k], d[k][j]))
                    if v != d[i][j]:
                        d[i][j], changed = v, True
    return d


def _chk_yoneda(table):
    A = TropicalQuantale(4)
    C = EnrichedCat(A, list(range(len(table))), table)
    P = presheaves(C)
    for o in C.objects:
        y = yoneda(C, o)
        for phi in P.elements:
            if hom_presheaf(P, y, phi) != phi[C.index[o]]:
                return False, {"object": o, "presheaf": list(phi)}
    return True, None


def _yoneda_doc(table):
    return {"enriched": {"C": {"coeff": "tropical(4)", "objects": list(range(len(table))),
                               "hom": [[("inf" if v == float("inf") else v) for v in r] for r in table]}},
            "tasks": [{"op": "yoneda", "args": ["C"], "expect": {"ok": True}}]}


def _chk_frob(case):
    Y, F = case
    sp = frobenius.tr_frob(Y, F)
    n = len(twisted_fixed_points(Y, F).orbits)
    return sp.dim == n, {"dim": sp.dim, "classes": n}


def _frob_doc(case):
    Y, F = case
    return {"groups": {"G": sc.group_doc(Y.group)}, "groupoids": {"Y": sc.groupoid_doc(Y, "G")},
            "maps": {"F": sc.map_doc(F, "Y", "Y")},
            "tasks": [{"op": "tr_frob", "args": ["Y", "F"], "expect": {"ok": True}}]}


_SOURCES = {"boolean": BooleanQuantale, "chain3": chain_quantale}
_TARGETS = {"boolean": BooleanQuantale, "chain3": chain_quantale, "tropical(3)": lambda: TropicalQuantale(3)}


def _gen_lax(rng):
    while True:
        s, t = rng.choice(sorted(_SOURCES)), rng.choice(sorted(_TARGETS))
        O = enhance.sm_poset_from_quantale(_SOURCES[s]())
        A = _TARGETS[t]()
        vals = {o: rng.choice(A.elements()) for o in O.objects}
        if LaxMap(O, A, vals, check=False).violation() is None:
            return s, t, vals


def _chk_lax(case):
    s, t, vals = case
    O = enhance.sm_poset_from_quantale(_SOURCES[s]())
    F = enhance.LaxFunctorF(O, _TARGETS[t](), vals)
    R = enhance.build_Enh(O, F)
    ok = R.first_req_holds() and enhance.yoneda_on_representables(R) and enhance.day_unit_laws(R)
    return ok, None


def _lax_doc(case):
    s, t, vals = case
    return {"posets": {"O": {"quantale": s}},
            "lax": {"F": {"source": "O", "target": t,
                          "values": [[o, ("inf" if v == float("inf") else v)] for o, v in vals.items()]}},
            "tasks": [{"op": "enh_laws", "args": ["F"], "expect": {"ok": True}}]}


def properties():
    return [
        Prop("convolution associativity", lambda r: _gen_chain(r, 3), _chk_assoc, _shrink_chain,
             lambda c: _chain_doc(c, "associativity")),
        Prop("convolution matches matrix product", lambda r: _gen_chain(r, 2), _chk_product, _shrink_chain,
             lambda c: _chain_doc(c, "conv_product")),
        Prop("trace comparison invertible", _gen_trace, _chk_trace, _shrink_trace, _trace_doc),
        Prop("base change", _gen_bc, _chk_bc, None, _bc_doc),
        Prop("enriched yoneda", _gen_tropical_cat, _chk_yoneda, None, _yoneda_doc),
        Prop("frobenius fixed points", lambda r: random_frobenius(r, 8, 3), _chk_frob, None, _frob_doc),
        Prop("enhancement first requirement", _gen_lax, _chk_lax, None, _lax_doc),
    ]


def _fails(prop, case):
    try:
        ok, w = prop.check(case)
    except Exception as exc:  # a crash is a failure too
        return True, f"{type(exc).__name__}: {exc}"
    return (not ok), w


def minimize(prop, case):
    witness = _fails(prop, case)[1]
    progress = True
    while progress:
        progress = False
        for smaller in prop.shrink(case):
            bad, w = _fails(prop, smaller)
            if bad:
                case, witness, progress = smaller, w, True
                break
    return case, witness


def selftest(corpus_size=50, seed=0, out_dir=".", stream=None):
    stream = stream or sys.stdout
    status = 0
    for k, prop in enumerate(properties()):
        rng = random.Random(f"{seed}:{prop.name}")
        passed = 0
        failure = None
        for _ in range(corpus_size):
            case = prop.gen(rng)
            bad, w = _fails(prop, case)
            if bad:
                failure = case
                break
            passed += 1
        stream.write(f"{prop.name:<36} {passed}/{corpus_size}\n")
        if failure is not None:
            status = 2
            case, witness = minimize(prop, failure)
            stream.write(f"  FAIL  witness: {json.dumps(witness, default=str, sort_keys=True)}\n")
            if prop.to_doc:
                path = os.path.join(out_dir, f"counterexample_{k}.json")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(sc.dumps(prop.to_doc(case)))
                stream.write(f"  counterexample scenario: {path}\n")
    stream.write("selftest " + ("passed" if status == 0 else "FAILED") + "\n")
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="deskcat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("file")
    r.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    r.add_argument("--parallel", action="store_true", help="run independent tasks concurrently")
    r.add_argument("--limits", default=None, help="e.g. carrier=64,group=128,stalk=16,presheaf=65536")
    r.add_argument("--timing", action="store_true", help="include per-task seconds in the JSON report")
    s = sub.add_parser("selftest", help="randomized property corpus")
    s.add_argument("--corpus-size", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", default=".", help="where counterexample scenarios are written")
    a = ap.parse_args(argv)
    if a.cmd == "run":
        try:
            limits = parse_limits(os.environ.get("DESKCAT_LIMITS"))
            limits = parse_limits(a.limits, limits)
        except sc.ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        code, _ = run_scenario(a.file, a.json, a.parallel, limits, a.timing)
        return code
    if a.corpus_size < 0:
        print("error: corpus size must be non-negative", file=sys.stderr)
        return 1
    return selftest(a.corpus_size, a.seed, a.out_dir)


if __name__ == "__main__":
    sys.exit(main())
