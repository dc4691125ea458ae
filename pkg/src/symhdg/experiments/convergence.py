"""Convergence studies and their CSV, Markdown and JSON reports."""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import __version__
from ..errors import SymHDGError
from ..geometry.mesh import DIAGONAL, build_unit_square_tri_mesh
from ..solver.assembly import SolverConfig, assemble_and_solve
from ..solver.local import default_degree, enrichment_degree
from .norms import l2_errors
from .problems import manufactured_problem

CSV_COLUMNS = ("level", "h", "dofs", "err_sigma", "ord_sigma", "err_u", "ord_u", "err_ustar", "ord_ustar", "seconds")
FORMATS = ("csv", "md", "markdown", "json")


class UsageError(SymHDGError, ValueError):
    """Invalid report or study request."""


@dataclass
class StudyConfig:
    """Everything needed to rerun a study."""

    problem: int = 1
    k: int = 1
    variant: str = "hdg-m"
    E: float | None = None
    nu: float | None = None
    levels: tuple = (3, 4, 5)
    alpha: float = 1.0
    quad_degree: int | None = None
    solver: str = "auto"
    tol: float = 1e-12
    mesh: str | None = None
    timings: bool = True

    def resolved(self):
        """Echo dictionary with defaults filled in."""
        problem = manufactured_problem(self.problem, self.E, self.nu)
        enr = self.quad_degree or enrichment_degree(self.k)
        return {
            "problem": self.problem,
            "k": self.k,
            "variant": self.variant,
            "E": problem.material.E,
            "nu": problem.material.nu,
            "levels": list(self.levels) if self.mesh is None else [],
            "alpha": self.alpha,
            "quad_degree_enrichment": enr,
            "quad_degree_load": max(default_degree(self.k), self.quad_degree or 0),
            "quad_degree_error": max(enr, 2 * (self.k + 2) + 4),
            "mesh": self.mesh or f"unit-square ({DIAGONAL})",
            "solver": self.solver,
            "tol": self.tol,
            "version": __version__,
        }


@dataclass
class LevelRecord:
    level: int | None
    h: float
    dofs: int
    err_sigma: float
    err_u: float
    err_ustar: float | None
    seconds: float | None = None
    solver: str = ""


@dataclass
class ConvergenceReport:
    """Per-level errors, pairwise observed orders and the configuration echo."""

    config: dict
    records: list = field(default_factory=list)

    def errors(self, name):
        return [getattr(r, f"err_{name}") for r in self.records]

    def orders(self, name):
        """``log2(e_{l-1} / e_l)`` per consecutive pair; ``None`` for the first level."""
        errs = self.errors(name)
        out = [None]
        for a, b in zip(errs[:-1], errs[1:]):
            out.append(observed_order(a, b))
        return out

    def to_dict(self):
        return {"config": self.config, "records": [asdict(r) for r in self.records]}

    @classmethod
    def from_dict(cls, data):
        return cls(dict(data["config"]), [LevelRecord(**r) for r in data["records"]])


def observed_order(coarse, fine, ratio=2.0):
    """Observed order between two errors on meshes refined by ``ratio``."""
    if coarse is None or fine is None or coarse <= 0 or fine <= 0:
        return None
    return math.log(coarse / fine) / math.log(ratio)


def run_level(mesh, problem, k, variant, solver_cfg, level=None, timings=True):
    t0 = time.perf_counter()
    fields = assemble_and_solve(mesh, problem, k, variant, solver_cfg)
    err = l2_errors(fields, problem, mesh)
    secs = time.perf_counter() - t0
    rec = LevelRecord(
        level,
        float(mesh.h),
        int(fields.info["n_trace_dofs"]),
        float(err.sigma),
        float(err.u),
        None if err.ustar is None else float(err.ustar),
        secs if timings else None,
        fields.info.get("method", ""),
    )
    return rec, fields


def convergence_study(config, mesh=None, progress=None):
    """Solve, postprocess and measure errors on each level of ``config``.

    When ``mesh`` is given it is used as the single level.  Solver errors
    propagate with the partial report attached as ``err.partial_report``.
    """
    if isinstance(config, dict):
        config = StudyConfig(**config)
    levels = list(config.levels)
    if mesh is None and any(b <= a for a, b in zip(levels[:-1], levels[1:])):
        raise UsageError("levels must be strictly ascending")
    problem = manufactured_problem(config.problem, config.E, config.nu)
    solver_cfg = SolverConfig(config.solver, config.tol, config.alpha, config.quad_degree)
    report = ConvergenceReport(config.resolved())
    meshes = [(None, mesh)] if mesh is not None else [(lv, None) for lv in levels]
    for level, m in meshes:
        try:
            m = m if m is not None else build_unit_square_tri_mesh(level)
            rec, _ = run_level(m, problem, config.k, config.variant, solver_cfg, level, config.timings)
        except SymHDGError as err:
            err.partial_report = report
            raise
        report.records.append(rec)
        if progress is not None:
            progress(rec)
    return report


def _fmt_err(x):
    return "-" if x is None else f"{x:.3E}"


def _fmt_ord(x):
    return "-" if x is None else f"{x:.2f}"


def _rows(report):
    osig, ou, ous = report.orders("sigma"), report.orders("u"), report.orders("ustar")
    for i, r in enumerate(report.records):
        yield [
            "-" if r.level is None else str(r.level),
            f"{r.h:.6g}",
            str(r.dofs),
            _fmt_err(r.err_sigma),
            _fmt_ord(osig[i]),
            _fmt_err(r.err_u),
            _fmt_ord(ou[i]),
            _fmt_err(r.err_ustar),
            _fmt_ord(ous[i]),
            "-" if r.seconds is None else f"{r.seconds:.2f}",
        ]


def _config_lines(report):
    return [f"{key} = {json.dumps(val)}" for key, val in report.config.items()]


def emit_report(report, format="csv"):
    """Render ``report`` as ``csv``, ``md`` (``markdown``) or ``json`` text."""
    if format == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    buf = io.StringIO()
    if format == "csv":
        for line in _config_lines(report):
            buf.write(f"# {line}\n")
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in _rows(report):
            buf.write(",".join(row) + "\n")
    elif format in ("md", "markdown"):
        for line in _config_lines(report):
            buf.write(f"<!-- {line} -->\n")
        buf.write("| " + " | ".join(CSV_COLUMNS) + " |\n")
        buf.write("|" + "---|" * len(CSV_COLUMNS) + "\n")
        for row in _rows(report):
            buf.write("| " + " | ".join(row) + " |\n")
    else:
        raise UsageError(f"unknown report format {format!r}; expected one of {', '.join(FORMATS)}")
    return buf.getvalue()


def report_from_json(text):
    return ConvergenceReport.from_dict(json.loads(text))


def parse_csv_report(text):
    """Rows of a CSV report as dictionaries of strings (comment lines skipped)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def geometric_orders(errors, ratio=2.0):
    """Pairwise orders of a plain error sequence."""
    e = np.asarray(errors, dtype=float)
    return list(np.log(e[:-1] / e[1:]) / np.log(ratio))
