"""Command-line front end.

Exit codes: 0 on success, 2 on usage errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import __version__
from .errors import (
    AmbiguousRankError,
    CapacityError,
    ConditioningError,
    DomainError,
    GeometryError,
    MaterialError,
    MeshParseError,
    QuadratureError,
    SolverError,
    SymHDGError,
    UnsupportedError,
)
from .experiments.convergence import StudyConfig, UsageError, convergence_study, emit_report
from .geometry.mesh import import_mesh
from .geometry.polygon import reference_triangle, regular_polygon, unit_square
from .mdecomp.verify import verify_mdecomposition
from .solver.material import MaterialLaw
from .spaces.element import enriched_stress_basis

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

USAGE_ERRORS = (UsageError, MaterialError, UnsupportedError, MeshParseError, GeometryError, CapacityError)
NUMERIC_ERRORS = (SolverError, ConditioningError, QuadratureError, AmbiguousRankError, DomainError)
MDECOMP_VARIANTS = ("hdg", "hdg-m", "q", "q-rational", "q-exponential")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_levels(text):
    """``"a..b"`` (inclusive) or a single level ``"a"``."""
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", text)
    if not m:
        raise UsageError(f"levels must look like a..b, got {text!r}")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) is not None else a
    if b < a:
        raise UsageError(f"empty level range {text!r}")
    return tuple(range(a, b + 1))


def parse_shape(text):
    if text == "triangle":
        return reference_triangle()
    if text == "square":
        return unit_square()
    m = re.fullmatch(r"polygon:(\d+)", text)
    if m:
        ne = int(m.group(1))
        if ne < 3:
            raise UsageError("a polygon needs at least 3 edges")
        return regular_polygon(ne)
    raise UsageError(f"unknown shape {text!r}; expected triangle, square or polygon:NE")


def _add_solver_flags(p):
    p.add_argument("--problem", type=int, choices=(1, 2), default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--variant", choices=("hdg", "hdg-m"), default="hdg-m")
    p.add_argument("--nu", type=float, default=None, help="Poisson ratio, 0 < nu < 0.5 (default 0.3)")
    p.add_argument("--E", type=float, default=None, help="Young's modulus (default 1 or 3 by problem)")
    p.add_argument("--alpha", type=float, default=1.0, help="stabilization multiple of the identity")
    p.add_argument("--quad-degree", type=int, default=None, help="override the enrichment quadrature degree")
    p.add_argument("--solver", choices=("auto", "dense", "cg"), default="auto")
    p.add_argument("--tol", type=float, default=1e-12, help="relative residual for CG")
    p.add_argument("--mesh", default=None, help="mesh file with 'v x y' and 't i j k' lines")
    p.add_argument("--format", choices=("csv", "md", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--no-timings", action="store_true", help="omit wall times for byte-identical output")


def build_parser():
    parser = _Parser(prog="symhdg", description="HDG elasticity with symmetric stresses and M-decompositions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    solve = sub.add_parser("solve", help="solve on one mesh and report errors")
    _add_solver_flags(solve)
    solve.add_argument("--level", type=int, default=3, help="uniform mesh level (ignored with --mesh)")
    conv = sub.add_parser("convergence", help="convergence history over mesh levels")
    _add_solver_flags(conv)
    conv.add_argument("--levels", type=parse_levels, default=(3, 4, 5), help="inclusive range a..b")
    check = sub.add_parser("check-mdecomp", help="verify an M-decomposition on one element")
    check.add_argument("--shape", default="triangle", help="triangle, square or polygon:NE")
    check.add_argument("--k", type=int, default=1)
    check.add_argument("--variant", choices=MDECOMP_VARIANTS, default="hdg")
    check.add_argument("--out", default=None)
    return parser


def _validate(args):
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    if args.nu is not None:
        if not 0.0 < args.nu < 0.5:
            raise UsageError(f"Poisson ratio must satisfy 0 < nu < 0.5, got {args.nu}")
        MaterialLaw(1.0 if args.E is None else args.E, args.nu)
    if args.E is not None and not args.E > 0:
        raise UsageError("--E must be positive")
    if args.alpha <= 0:
        raise UsageError("--alpha must be positive")
    if args.quad_degree is not None and args.quad_degree < 2 * args.k + 8:
        raise UsageError(f"--quad-degree must be at least 2k+8 = {2 * args.k + 8}")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _study(args, levels):
    _validate(args)
    mesh = None
    if args.mesh is not None:
        try:
            with open(args.mesh, encoding="utf-8") as fh:
                mesh = import_mesh(fh.read())
        except OSError as err:
            raise UsageError(f"cannot read mesh file: {err}") from None
    config = StudyConfig(
        problem=args.problem,
        k=args.k,
        variant=args.variant,
        E=args.E,
        nu=args.nu,
        levels=levels,
        alpha=args.alpha,
        quad_degree=args.quad_degree,
        solver=args.solver,
        tol=args.tol,
        mesh=args.mesh,
        timings=not args.no_timings,
    )
    report = convergence_study(config, mesh=mesh)
    _write(emit_report(report, args.format), args.out)


def _check(args):
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    shape = parse_shape(args.shape)
    spaces = enriched_stress_basis(shape, args.k, args.variant)
    report = verify_mdecomposition(spaces)
    data = report.to_dict()
    data = {"shape": args.shape, "k": args.k, "variant": args.variant, **data}
    _write(json.dumps(data, indent=2) + "\n", args.out)


def run(argv=None):
    """Run the command line; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "solve":
            _study(args, (args.level,))
        elif args.command == "convergence":
            _study(args, args.levels)
        else:
            _check(args)
    except USAGE_ERRORS as err:
        print(f"symhdg: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as err:
        print(f"symhdg: numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        partial = getattr(err, "partial_report", None)
        if partial is not None and partial.records:
            print(emit_report(partial, "csv"), file=sys.stderr, end="")
        return EXIT_NUMERIC
    except SymHDGError as err:
        print(f"symhdg: error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run())
