"""Batch front door: JSON problem documents in, JSON reports and CSV grids out.

Exit codes: 0 success (all checked properties passed), 2 computation finished
but a checked property failed, 3 input or validation error, 4 numerical
non-convergence.  Reports are written on 0 and 2, with all floats printed at
17 significant digits and keys sorted, so identical (input, seed, overrides)
produce byte-identical files.  All randomness flows from one 64-bit seed
through the counter-based Philox generator.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import acceptance
from .cones import (ConeSpec, ConfigurationError, ellipticity_check,
                    free_dim_verify, polar_check, psplus_membership)
from .dirichlet import DirichletProblem, ma_solve_2d, perron_solve
from .exprs import Expr, ParseError
from .fields import GridField, hull_estimate, psh_classify, subaffine_check
from .garding import (MAPolynomial, cone_ellipticity_E2, hyperbolicity_test,
                      theorem_E3_check)
from .geometry import (ConstructionRefused, DomainSpec, SubmanifoldSpec,
                       boundary_convexity_check, exhaustion_check,
                       global_defining_function, tube_report)
from .linalg import InputError, SymMatrix, unpack_upper

OK, PROPERTY_FAILED, INPUT_ERROR, NO_CONVERGENCE = 0, 2, 3, 4

SCHEMA_VERSION = 1


def format_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    out = []
    _write(obj, out, 0)
    return "".join(out) + "\n"


def _write(obj, out, indent):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(f'{pad}  "{k}": ')
            _write(obj[k], out, indent + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _write(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append("true" if obj is True else "false" if obj is False else "null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        out.append('"inf"' if np.isinf(v) else '"nan"' if np.isnan(v)
                   else format(v, ".17g"))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, np.ndarray):
        _write(obj.tolist(), out, indent)
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def write_report(outdir, name, doc):
    doc = dict(doc)
    doc["schema_version"] = SCHEMA_VERSION
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    with open(path, "w") as fh:
        fh.write(format_json(doc))
    return path


def load_input(path):
    import json
    with open(path) as fh:
        return json.load(fh)


def _verdict_doc(v):
    return {"class": v.klass, "margin": float(v.margin),
            "witness": None if v.witness is None else list(v.witness.entries)}


def _matrices_from(doc, n):
    return [SymMatrix(unpack_upper(e, n)) for e in doc.get("matrices", [])]


def _field_from(doc):
    spec = doc["field"]
    if "csv" in spec:
        return GridField.read_csv(spec["csv"])
    expr = Expr(len(spec["box"]), spec["expression"])
    return GridField.from_function(
        lambda *cs: expr.value(np.stack(cs, axis=-1)), spec["box"], spec["h"])


def _boundary_fn(doc, n):
    b = doc["boundary"]
    if b.get("kind", "expression") != "expression":
        raise InputError("unsupported boundary kind")
    expr = Expr(n, b["text"])
    return lambda pts: expr.value(pts)


def _problem_from(doc, args):
    box = tuple(tuple(b) for b in doc["box"])
    cone_doc = dict(doc["cone"])
    if args.density:
        cone_doc["density"] = args.density
    if args.seed is not None:
        cone_doc["seed"] = args.seed
    cone = ConeSpec.from_json(cone_doc)
    interior = None
    if "domain" in doc:
        dom = DomainSpec.from_json(doc["domain"])
        interior = lambda pts: dom.value(pts) < 0
    return DirichletProblem(box, float(doc["h"]), cone,
                            _boundary_fn(doc, len(box)),
                            stencil_width=args.stencil or doc.get("stencil"),
                            interior=interior)


# -- verbs ------------------------------------------------------------------

def cmd_cone_check(doc, args):
    cone = ConeSpec.from_json(doc["cone"])
    rep = {"ellipticity": ellipticity_check(cone)}
    if cone.kind == "generated":
        rep["polar"] = polar_check(cone, trials=doc.get("trials", 40),
                                   seed=args.seed if args.seed is not None else 7)
    verdicts = []
    for m in _matrices_from(doc, cone.n):
        verdicts.append(_verdict_doc(psplus_membership(m, cone, args.tau)))
    rep["memberships"] = verdicts
    write_report(args.out, "cone-check.json", rep)
    return OK if rep["ellipticity"]["elliptic"] else PROPERTY_FAILED


def cmd_cone_freedim(doc, args):
    cone = ConeSpec.from_json(doc["cone"])
    rep = free_dim_verify(cone, int(doc["claimed"]),
                          trials=int(doc.get("trials", 200)),
                          seed=args.seed if args.seed is not None else 11,
                          tau=args.tau)
    write_report(args.out, "cone-freedim.json", rep)
    return OK if rep["lower_ok"] and rep["upper_ok"] else PROPERTY_FAILED


def cmd_garding_test(doc, args):
    M = MAPolynomial.from_json(doc["polynomial"], int(doc["n"]))
    seed = args.seed if args.seed is not None else 5
    rep = {
        "degree": M.degree,
        "normalized": M.normalized,
        "identity_value": float(M.identity_value),
        "hyperbolicity": hyperbolicity_test(M, trials=doc.get("trials", 32),
                                            seed=seed),
        "ellipticity": cone_ellipticity_E2(M, seed=seed),
    }
    if rep["hyperbolicity"]["hyperbolic"] and rep["ellipticity"]["elliptic"]:
        rep["interior_linearization"] = theorem_E3_check(M, trials=doc.get(
            "trials", 32), seed=seed)
        ok = rep["interior_linearization"]["elliptic_at_interior"]
    else:
        ok = False
    write_report(args.out, "garding-test.json", rep)
    return OK if ok else PROPERTY_FAILED


def cmd_field_classify(doc, args):
    field = _field_from(doc)
    cone = ConeSpec.from_json(doc["cone"])
    cls = psh_classify(field, cone, epsilon=float(doc.get("epsilon", 0.0)),
                       tau=args.tau)
    from .fields import CLASS_NAMES
    counts = {CLASS_NAMES[k]: int((cls.classes == k).sum())
              for k in sorted(CLASS_NAMES)}
    rep = {"summary": cls.summary, "counts": counts,
           "min_margin": float(cls.margins.min()),
           "interior_points": int(cls.classes.size)}
    write_report(args.out, "field-classify.json", rep)
    return OK if cls.all_psh else PROPERTY_FAILED


def cmd_subaffine_check(doc, args):
    field = _field_from(doc)
    per_point, verdict = subaffine_check(field, tau=args.tau)
    rep = {"subaffine": bool(verdict),
           "violations": int((~per_point).sum()),
           "interior_points": int(per_point.size)}
    write_report(args.out, "subaffine-check.json", rep)
    return OK if verdict else PROPERTY_FAILED


def cmd_hull_estimate(doc, args):
    cone = ConeSpec.from_json(doc["cone"])
    mask = hull_estimate(np.asarray(doc["points"], dtype=float), cone,
                         tuple(tuple(b) for b in doc["box"]), float(doc["h"]),
                         budget=int(doc.get("budget", 2000)),
                         seed=args.seed if args.seed is not None else 17)
    os.makedirs(args.out, exist_ok=True)
    mask.write_csv(os.path.join(args.out, "hull-mask.csv"))
    rep = {"kept_points": int(mask.values.sum()),
           "grid_points": int(mask.values.size)}
    write_report(args.out, "hull-estimate.json", rep)
    return OK


def cmd_solve_dirichlet(doc, args):
    prob = _problem_from(doc, args)
    solver = doc.get("solver", {})
    tol = args.tol or float(solver.get("tol", 1e-8))
    max_iters = args.max_iters or int(solver.get("max_iters", 400000))
    u, rep = perron_solve(prob, tol=tol, max_iters=max_iters,
                          mode=args.mode or solver.get("mode", "auto"))
    os.makedirs(args.out, exist_ok=True)
    u.write_csv(os.path.join(args.out, "solution.csv"))
    doc_rep = rep.to_json()
    doc_rep["wall_time_s"] = 0.0  # kept deterministic; timing goes to stderr
    print(f"solve-dirichlet: {rep.iterations} iterations, "
          f"residual {rep.residual:.3e}, {rep.wall_time:.2f}s "
          f"[{rep.backend}/{rep.mode}]", file=sys.stderr)
    write_report(args.out, "solve-report.json", doc_rep)
    return OK if rep.converged else NO_CONVERGENCE


def cmd_solve_ma2d(doc, args):
    prob = _problem_from(doc, args)
    solver = doc.get("solver", {})
    tol = args.tol or float(solver.get("tol", 1e-9))
    max_iters = args.max_iters or int(solver.get("max_iters", 400000))
    u, rep = ma_solve_2d(prob, float(doc.get("c", 0.0)), tol=tol,
                         max_iters=max_iters,
                         mode=args.mode or solver.get("mode", "auto"))
    os.makedirs(args.out, exist_ok=True)
    u.write_csv(os.path.join(args.out, "solution.csv"))
    doc_rep = rep.to_json()
    doc_rep["wall_time_s"] = 0.0
    print(f"solve-ma2d: {rep.iterations} iterations, residual "
          f"{rep.residual:.3e}, {rep.wall_time:.2f}s", file=sys.stderr)
    write_report(args.out, "solve-report.json", doc_rep)
    return OK if rep.converged else NO_CONVERGENCE


def cmd_domain_check(doc, args):
    dom = DomainSpec.from_json(doc["domain"])
    cone = ConeSpec.from_json(doc["cone"])
    seed = args.seed if args.seed is not None else 2024
    budget = int(doc.get("budget", 32))
    xs = dom.boundary_sample(budget, seed)
    worst = None
    for x in xs:
        rep = boundary_convexity_check(dom, cone, x, tau=args.tau)
        if worst is None or rep["min_pairing"] < worst["min_pairing"]:
            worst = dict(rep, point=x.tolist())
    strict_everywhere = worst["min_pairing"] > args.tau
    out = {
        "boundary_samples": budget,
        "strict": bool(strict_everywhere),
        "worst": {
            "point": worst["point"],
            "min_pairing": worst["min_pairing"],
            "witness": None if worst["witness"] is None
            else list(worst["witness"].entries),
        },
    }
    if strict_everywhere:
        try:
            built = global_defining_function(dom, cone, budget=budget,
                                             seed=seed)
            out["defining_function"] = built["constants"]
            out["exhaustion"] = exhaustion_check(dom, cone, seed=seed)
        except ConstructionRefused as exc:
            out["defining_function"] = {"refused": str(exc)}
            strict_everywhere = False
    write_report(args.out, "domain-check.json", out)
    return OK if strict_everywhere else PROPERTY_FAILED


def cmd_tube_check(doc, args):
    m = doc["manifold"]
    M = SubmanifoldSpec(n=int(m["n"]), kind=m["kind"],
                        params=tuple(m.get("params", ())))
    cone = ConeSpec.from_json(doc["cone"])
    try:
        rep = tube_report(M, cone, float(doc["radius"]),
                          tuple(tuple(b) for b in doc["box"]),
                          grid_n=int(doc.get("grid", 13)),
                          seed=args.seed if args.seed is not None else 2024,
                          tau=args.tau)
    except ConstructionRefused as exc:
        write_report(args.out, "tube-check.json",
                     {"refused": str(exc), "tube_strict": False})
        return PROPERTY_FAILED
    write_report(args.out, "tube-check.json", rep)
    return OK if rep["tube_strict"] and rep["zero_set_ok"] else PROPERTY_FAILED


def cmd_selftest(doc, args):
    results = acceptance.run_all(selected=doc.get("criteria"),
                                 tol_override=args.tol)
    rep = {"criteria": [{"name": n, "passed": bool(ok), "detail": str(d)}
                        for n, ok, d in results]}
    if args.out:
        write_report(args.out, "selftest.json", rep)
    if any("non-convergence" in str(d) for _, ok, d in results if not ok):
        return NO_CONVERGENCE
    return OK if all(ok for _, ok, _ in results) else PROPERTY_FAILED


VERBS = {
    "cone-check": (cmd_cone_check, True),
    "cone-freedim": (cmd_cone_freedim, True),
    "garding-test": (cmd_garding_test, True),
    "field-classify": (cmd_field_classify, True),
    "subaffine-check": (cmd_subaffine_check, True),
    "hull-estimate": (cmd_hull_estimate, True),
    "solve-dirichlet": (cmd_solve_dirichlet, True),
    "solve-ma2d": (cmd_solve_ma2d, True),
    "domain-check": (cmd_domain_check, True),
    "tube-check": (cmd_tube_check, True),
    "selftest": (cmd_selftest, False),
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="hesscone",
        description="cone potential-theory toolkit: membership, free "
                    "dimensions, classification, and degenerate Dirichlet "
                    "solves")
    ap.add_argument("verb", choices=sorted(VERBS))
    ap.add_argument("--input", help="JSON problem document")
    ap.add_argument("--out", default="out", help="report directory")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--tau", type=float, default=1e-9,
                    help="membership tolerance band")
    ap.add_argument("--density", type=int, default=None)
    ap.add_argument("--stencil", type=int, default=None)
    ap.add_argument("--max-iters", type=int, default=None)
    ap.add_argument("--mode", choices=["jacobi", "gauss-seidel"], default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn, needs_input = VERBS[args.verb]
    doc = {}
    if needs_input:
        if not args.input:
            print(f"{args.verb} requires --input", file=sys.stderr)
            return INPUT_ERROR
        try:
            doc = load_input(args.input)
        except (OSError, ValueError) as exc:
            print(f"cannot read input: {exc}", file=sys.stderr)
            return INPUT_ERROR
    elif args.input:
        try:
            doc = load_input(args.input)
        except (OSError, ValueError) as exc:
            print(f"cannot read input: {exc}", file=sys.stderr)
            return INPUT_ERROR
    try:
        return fn(doc, args)
    except (InputError, ConfigurationError, ParseError, KeyError,
            TypeError, ValueError) as exc:
        print(f"input error: {exc!r}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
