"""Command-line front end: one subcommand per library operation.

Reports go to stdout as JSON (or CSV where offered), diagnostics to stderr.
Exit codes: 0 ok, 1 input error, 2 precondition error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys

import numpy as np

from . import io
from .algebra import (
    associator_residual,
    find_unit,
    gen_diagonal,
    gen_gh,
    gen_polynomial,
    gen_quadratic,
    gen_truncated,
    gen_zero,
    gh_default,
)
from .cohomology import cocycle_defect, z2_dimension
from .connection import (
    connection_along,
    multiplicativity_defect,
    parallel_transport,
    solve_differential_connection,
)
from .errors import AlgebraError, InputError, PreconditionError
from .family import (
    BaseGrid,
    classify_map,
    conjugation_family,
    deformation_family,
    pullback,
    rotation,
    section_product,
    validate_family,
)
from .invariants import isomorphism_objective, iso_signature, try_isomorphism
from .variety import embed, project_to_variety, restrict

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3

ALGEBRA_KINDS = ("truncated", "polynomial", "gh", "quadratic", "diagonal", "zero")
FAMILY_KINDS = ("deformation", "rotation")


class NonConvergence(AlgebraError):
    def __init__(self, report):
        super().__init__("iteration did not converge")
        self.report = report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt_cell(v):
    if isinstance(v, (float, np.floating)):
        return io._fmt(float(v))
    return v


def _csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt_cell(v) for k, v in r.items()})
    return buf.getvalue()


def _algebra(path):
    return io.algebra_from_dict(io.read_document(path))


def _family(path):
    return io.family_from_dict(io.read_document(path))


# -- subcommands ------------------------------------------------------------------


def cmd_check(a):
    r = associator_residual(_algebra(a.algebra))
    return {"n": r.tensor.shape[0], "max_abs": r.max_abs, "frobenius_norm": r.frobenius_norm,
            "associative": r.max_abs <= a.tol}


def cmd_unit(a):
    e = find_unit(_algebra(a.algebra), a.tol)
    return {"unital": e is not None, "unit": None if e is None else e.tolist()}


def cmd_gen(a):
    k = a.kind
    if k in FAMILY_KINDS:
        base = BaseGrid.interval(a.t0, a.t1, a.nodes)
        if k == "deformation":
            F = deformation_family(base, a.interpolation)
        else:
            F = conjugation_family(gen_diagonal(2), rotation, base, a.interpolation)
        return io.family_to_dict(F)
    if k == "quadratic":
        return io.algebra_to_dict(gen_quadratic(a.c))
    if a.n is None:
        raise InputError(f"--n is required for --kind {k}")
    if k == "gh":
        if a.g is None and a.h is None:
            A = gh_default(a.n)
        elif a.g is None or a.h is None:
            raise InputError("--g and --h must be given together")
        else:
            A = gen_gh(a.n, a.g, a.h)
    else:
        A = {"truncated": gen_truncated, "polynomial": gen_polynomial,
             "diagonal": gen_diagonal, "zero": gen_zero}[k](a.n)
    return io.algebra_to_dict(A)


def cmd_signature(a):
    return iso_signature(_algebra(a.algebra), a.tol).to_dict()


def cmd_iso(a):
    A, B = _algebra(a.a), _algebra(a.b)
    g = try_isomorphism(A, B, a.attempts, a.tol, a.seed)
    report = {"found": g is not None, "g": None if g is None else g.tolist(),
              "objective": None if g is None else isomorphism_objective(A, B, g)}
    if g is None:
        raise NonConvergence(report)
    return report


def cmd_z2(a):
    return {"z2_dim": z2_dimension(_algebra(a.algebra), a.tol)}


def cmd_cocycle(a):
    A = _algebra(a.algebra)
    f = io.bilinear_from_dict(io.read_document(a.f), A.n)
    d = cocycle_defect(A, f)
    return {"defect": d, "cocycle": d <= a.tol}


def cmd_project(a):
    rep = project_to_variety(_algebra(a.algebra), a.tol, a.max_iter, not a.no_normalize)
    if not rep.converged:
        raise NonConvergence(rep.to_dict())
    return rep.to_dict()


def cmd_embed(a):
    return io.algebra_to_dict(embed(_algebra(a.algebra)))


def cmd_restrict(a):
    return io.algebra_to_dict(restrict(_algebra(a.algebra), a.tol))


def _validate_rows(F, tol, workers):
    v = validate_family(F, tol, workers)
    return v, [{"node": s, "residual": float(r), "valid": int(r <= tol)} for s, r in enumerate(v.residuals)]


def cmd_family_validate(a):
    v, rows = _validate_rows(_family(a.family), a.tol, a.workers)
    return rows if a.format == "csv" else v.to_dict()


def cmd_family_classify(a):
    rep = classify_map(_family(a.family), a.tol, a.attempts, a.seed, a.workers)
    return rep.rows() if a.format == "csv" else rep.to_dict()


def cmd_section_mul(a):
    F = _family(a.family)
    s = io.section_from_dict(io.read_document(a.s), F)
    t = io.section_from_dict(io.read_document(a.t), F)
    return io.section_to_dict(section_product(F, s, t))


def cmd_pullback(a):
    F = _family(a.family)
    base, pts = io.map_from_dict(io.read_document(a.map))
    return io.family_to_dict(pullback(F, base, pts))


def cmd_connection_solve(a):
    F = _family(a.family)
    if a.t is None:
        return connection_along(F, a.h, a.workers).to_dict()
    sol = solve_differential_connection(F, a.t, a.h)
    return {"t": a.t, "gamma": sol.G.tolist(), "residual": sol.residual,
            "differential": sol.residual <= a.tol}


def cmd_transport(a):
    F = _family(a.family)
    if a.connection is not None:
        P = io.path_connection_from_dict(io.read_document(a.connection))
    else:
        P = connection_along(F, a.h)
    T = parallel_transport(F, P, a.t0, a.t1, a.steps, a.tol)
    out = T.to_dict()
    out["multiplicativity_defect"] = multiplicativity_defect(T, F.fiber_at(T.source_t), F.fiber_at(T.target_t))
    return out


def cmd_sweep(a):
    F = _family(a.family)
    if a.op == "family-validate":
        _, rows = _validate_rows(F, a.tol, a.workers)
    else:
        P = connection_along(F, a.h, a.workers)
        rows = []
        for s, t in enumerate(F.base.axis):
            row = {"node": s, "t": float(t), "residual": float(P.residuals[s]),
                   "differential": int(P.residuals[s] <= a.tol)}
            for (p, q), val in np.ndenumerate(P.samples[s]):
                row[f"gamma_{p + 1}{q + 1}"] = float(val)
            rows.append(row)
    return rows if a.format == "csv" else {"rows": rows}


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="algbundle", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help, inputs=(), seed=False, fmt=False, workers=False):
        sp = sub.add_parser(name, help=help)
        for arg in inputs:
            sp.add_argument(arg, help="JSON file path, or - for stdin")
        sp.add_argument("--tol", type=float, default=1e-9)
        if seed:
            sp.add_argument("--seed", type=int, required=True)
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default="json")
        if workers:
            sp.add_argument("--workers", type=int, default=None)
        sp.set_defaults(func=fn)
        return sp

    add("check", cmd_check, "associator residual of an algebra", ["algebra"])
    add("unit", cmd_unit, "two-sided unit, if any", ["algebra"])
    g = add("gen", cmd_gen, "generate an algebra or an example family")
    g.add_argument("--kind", choices=ALGEBRA_KINDS + FAMILY_KINDS, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--g", type=float, nargs="+")
    g.add_argument("--h", type=float, nargs="+")
    g.add_argument("--c", type=float, default=0.0, help="x^2 = c for --kind quadratic")
    g.add_argument("--t0", type=float, default=-1.0)
    g.add_argument("--t1", type=float, default=1.0)
    g.add_argument("--nodes", type=int, default=201)
    g.add_argument("--interpolation", choices=("linear", "cubic"), default="linear")
    add("signature", cmd_signature, "isomorphism invariants", ["algebra"])
    iso = add("iso", cmd_iso, "search for an isomorphism A -> B", ["a", "b"], seed=True)
    iso.add_argument("--attempts", type=int, default=10)
    add("z2", cmd_z2, "dimension of the 2-cocycle space", ["algebra"])
    add("cocycle", cmd_cocycle, "cocycle defect of a bilinear map", ["algebra", "f"])
    pr = add("project", cmd_project, "Gauss-Newton projection onto the variety", ["algebra"])
    pr.add_argument("--max-iter", type=int, default=50)
    pr.add_argument("--no-normalize", action="store_true")
    add("embed", cmd_embed, "zero-pad to one dimension up", ["algebra"])
    add("restrict", cmd_restrict, "drop the last basis vector", ["algebra"])
    add("family-validate", cmd_family_validate, "per-node associator residuals",
        ["family"], fmt=True, workers=True)
    fc = add("family-classify", cmd_family_classify, "per-node signatures and clusters",
             ["family"], seed=True, fmt=True, workers=True)
    fc.add_argument("--attempts", type=int, default=4)
    add("section-mul", cmd_section_mul, "pointwise product of two sections", ["family", "s", "t"])
    add("pullback", cmd_pullback, "pull a family back along a sampled map", ["family", "map"])
    cs = add("connection-solve", cmd_connection_solve, "differential-connection obstruction",
             ["family"], workers=True)
    cs.add_argument("--t", type=float)
    cs.add_argument("--h", type=float)
    tr = add("transport", cmd_transport, "RK4 parallel transport", ["family"])
    tr.add_argument("--connection", help="path connection JSON; solved from the family if omitted")
    tr.add_argument("--t0", type=float, required=True)
    tr.add_argument("--t1", type=float, required=True)
    tr.add_argument("--steps", type=int, default=1000)
    tr.add_argument("--h", type=float)
    sw = add("sweep", cmd_sweep, "per-node sweep, CSV by default", ["family"], workers=True)
    sw.add_argument("--op", choices=("connection-solve", "family-validate"), required=True)
    sw.add_argument("--format", choices=("json", "csv"), default="csv")
    sw.add_argument("--h", type=float)
    return p


def _emit(result, fmt: str) -> None:
    if fmt == "csv" and isinstance(result, list):
        sys.stdout.write(_csv(result))
    else:
        sys.stdout.write(io.dumps(result) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = getattr(args, "format", "json")
    try:
        result = args.func(args)
    except NonConvergence as exc:
        _emit(exc.report, "json")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, ValueError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(result, fmt)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
