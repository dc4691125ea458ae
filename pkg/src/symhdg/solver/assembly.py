"""Global trace system, Dirichlet elimination, linear solve and reconstruction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..errors import ConditioningError, SolverError
from ..spaces.bases import legendre_on_edge
from ..geometry.quadrature import edge_quadrature
from .local import ElementBasis, PostprocessOperator, condense, local_blocks

DENSE_LIMIT = 5000


@dataclass
class SolverConfig:
    """Linear solver settings.

    ``method`` is ``"auto"`` (dense Cholesky below ``DENSE_LIMIT`` trace
    unknowns, Jacobi-preconditioned CG above), ``"dense"`` or ``"cg"``.
    Under ``"auto"`` a CG breakdown (typical for nearly incompressible
    materials) falls back to a sparse direct factorization; an explicit
    ``"cg"`` raises :class:`SolverError` instead.
    """

    method: str = "auto"
    tol: float = 1e-12
    alpha: float = 1.0
    degree: int | None = None
    chunk: int = 2048

    def to_dict(self):
        return {"method": self.method, "tol": self.tol, "alpha": self.alpha, "degree": self.degree}


@dataclass
class ShapeClass:
    """Elements sharing one shape up to translation."""

    basis: ElementBasis
    local: object
    elements: np.ndarray
    post: PostprocessOperator | None = None


@dataclass
class TraceSystem:
    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    dirichlet_dofs: np.ndarray
    dirichlet_values: np.ndarray
    free_dofs: np.ndarray


@dataclass
class SolutionFields:
    """Discrete solution in per-class orthonormal local coordinates.

    ``sigma`` (n_el, ns) and ``u`` (n_el, nv) are element coefficients,
    ``uhat`` (n_edges, 2(k+1)) holds edge coefficients in the global edge
    direction, and ``ustar`` (n_el, 2, nw) the optional postprocessed field.
    """

    mesh: object
    k: int
    variant: str
    classes: list
    element_class: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    uhat: np.ndarray
    loads: np.ndarray
    ustar: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def local_uhat(self, elements):
        """Trace coefficients of ``elements`` in their local orientation."""
        return _gather_uhat(self.mesh, self.k, elements, self.uhat)

    def transmission_residual(self):
        """Largest interior-edge sum of ``<sigma_hat n, mu>`` over both sides."""
        mesh = self.mesh
        nm = 2 * (self.k + 1)
        acc = np.zeros((mesh.n_edges, nm))
        scale = 0.0
        for cls in self.classes:
            el = cls.elements
            loc = cls.local
            uh = self.local_uhat(el)
            flux = self.sigma[el] @ loc.C - self.u[el] @ loc.R + uh @ loc.M
            scale = max(scale, float(np.abs(flux).max()))
            flux = flux * _sign_pattern(mesh, self.k, el)
            np.add.at(acc, mesh.element_edges[el].ravel(), flux.reshape(-1, nm))
        interior = ~mesh.boundary_flags
        res = float(np.abs(acc[interior]).max()) if interior.any() else 0.0
        return res, scale


def _sign_pattern(mesh, k, elements):
    """Per-DOF orientation factors (len(elements), 3*2(k+1))."""
    n = np.arange(k + 1)
    s = mesh.element_edge_signs[elements].astype(float)
    f = np.where(s[:, :, None] > 0, 1.0, (-1.0) ** n[None, None, :])
    return np.repeat(f[:, :, None, :], 2, axis=2).reshape(len(elements), -1)


def _dof_pattern(mesh, k, elements):
    nm = 2 * (k + 1)
    e = mesh.element_edges[elements]
    return (e[:, :, None] * nm + np.arange(nm)[None, None, :]).reshape(len(elements), -1)


def _gather_uhat(mesh, k, elements, uhat):
    flat = uhat.ravel()
    return flat[_dof_pattern(mesh, k, elements)] * _sign_pattern(mesh, k, elements)


def shape_classes(mesh, k, variant, material, config, postprocess=True):
    """Group elements by shape and build cached local operators."""
    coords = mesh.coords
    rel = coords - coords.mean(axis=1, keepdims=True)
    scale = max(float(np.abs(rel).max()), 1e-300)
    keys = np.round(rel.reshape(len(rel), -1) / scale, 10) + 0.0
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    classes = []
    for c in range(len(uniq)):
        members = np.flatnonzero(inverse == c)
        basis = ElementBasis(coords[members[0]], k, variant, config.degree)
        local = local_blocks(basis, material, config.alpha)
        condense(local)
        post = PostprocessOperator(basis) if postprocess else None
        classes.append(ShapeClass(basis, local, members, post))
    return classes, inverse


def _element_loads(mesh, cls, f, chunk):
    basis = cls.basis
    rule = basis.load_rule
    centroids = mesh.coords[cls.elements].mean(axis=1)
    out = np.empty((len(cls.elements), basis.nv))
    for start in range(0, len(centroids), chunk):
        c = centroids[start : start + chunk]
        pts = (c[:, None, :] + rule.points[None, :, :]).reshape(-1, 2)
        fv = np.asarray(f(pts)).reshape(len(c), len(rule.weights), 2)
        out[start : start + chunk] = np.einsum("q,eqc,qcj->ej", rule.weights, fv, basis.phi_v_load)
    return out


def dirichlet_data(mesh, k, g, degree):
    """Edge-wise L2 projection of ``g`` on boundary edges (global direction)."""
    bnd = np.flatnonzero(mesh.boundary_flags)
    rule = edge_quadrature(degree)
    s = rule.points
    a = mesh.vertices[mesh.edges[bnd, 0]]
    b = mesh.vertices[mesh.edges[bnd, 1]]
    length = np.linalg.norm(b - a, axis=1)
    pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
    gv = np.asarray(g(pts.reshape(-1, 2))).reshape(len(bnd), len(s), 2)
    P = legendre_on_edge(k, s, 1.0)
    coef = np.einsum("q,eqc,qn,e->ecn", rule.weights, gv, P, np.sqrt(length))
    return bnd, coef.reshape(len(bnd), -1)


def build_trace_system(mesh, classes, loads, k, g, degree):
    nm = 2 * (k + 1)
    N = mesh.n_edges * nm
    rows, cols, vals = [], [], []
    rhs = np.zeros(N)
    for cls in classes:
        K, Z = cls.local.factors["K"], cls.local.factors["Z"]
        el = cls.elements
        dofs = _dof_pattern(mesh, k, el)
        sg = _sign_pattern(mesh, k, el)
        Ke = sg[:, :, None] * K[None] * sg[:, None, :]
        rows.append(np.repeat(dofs, dofs.shape[1], axis=1).ravel())
        cols.append(np.tile(dofs, (1, dofs.shape[1])).ravel())
        vals.append(Ke.ravel())
        np.add.at(rhs, dofs.ravel(), (sg * (loads[el] @ Z.T)).ravel())
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
    ).tocsr()
    mat.sum_duplicates()
    bnd, coef = dirichlet_data(mesh, k, g, degree)
    ddofs = (bnd[:, None] * nm + np.arange(nm)).ravel()
    mask = np.ones(N, dtype=bool)
    mask[ddofs] = False
    return TraceSystem(mat, rhs, ddofs, coef.ravel(), np.flatnonzero(mask))


def _pcg(A, b, tol, maxiter):
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverError("trace matrix has a nonpositive diagonal entry", [])
    M = scipy.sparse.diags(1.0 / d)
    history = []
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0, history

    def record(xk):
        history.append(float(np.linalg.norm(b - A @ xk)) / bnorm)

    x, info = scipy.sparse.linalg.cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=record)
    if info != 0:
        raise SolverError(f"conjugate gradients did not converge in {maxiter} iterations", history)
    return x, len(history), history


def solve_trace_system(system, config):
    """Eliminate Dirichlet unknowns and solve the SPD interior system."""
    A = system.matrix
    free = system.free_dofs
    x = np.zeros(A.shape[0])
    x[system.dirichlet_dofs] = system.dirichlet_values
    b = system.rhs[free] - A[free][:, system.dirichlet_dofs] @ system.dirichlet_values
    Aff = A[free][:, free].tocsr()
    n = len(free)
    method = config.method
    if method == "auto":
        method = "dense" if n < DENSE_LIMIT else "cg"
    info = {"method": method, "n_free": int(n), "iterations": 0}
    if n == 0:
        return x, info
    if method == "dense":
        dense = Aff.toarray()
        try:
            cf = scipy.linalg.cho_factor(dense)
        except np.linalg.LinAlgError:
            raise ConditioningError("trace system is not positive definite") from None
        xf = scipy.linalg.cho_solve(cf, b)
    elif method == "cg":
        maxiter = int(np.ceil(20 * np.sqrt(n)))
        try:
            xf, it, hist = _pcg(Aff, b, config.tol, maxiter)
            info["iterations"] = it
        except SolverError as err:
            if config.method != "auto":
                raise
            info.update(method="sparse-direct", cg_failure=str(err), iterations=len(err.residuals))
            xf = scipy.sparse.linalg.splu(Aff.tocsc()).solve(b)
    else:
        raise ValueError(f"unknown solver {method!r}")
    bn = max(np.linalg.norm(b), 1e-300)
    info["residual"] = float(np.linalg.norm(b - Aff @ xf) / bn)
    x[free] = xf
    return x, info


def assemble_and_solve(mesh, problem, k, variant="hdg-m", solver_cfg=None, postprocess=True):
    """Solve the HDG system for ``problem`` on ``mesh``.

    ``problem`` needs ``material``, ``f(points)`` and ``g(points)``.
    """
    config = solver_cfg or SolverConfig()
    degree = config.degree or (2 * k + 8)
    t0 = time.perf_counter()
    classes, which = shape_classes(mesh, k, variant, problem.material, config, postprocess)
    nv = classes[0].basis.nv
    ns = classes[0].basis.ns
    loads = np.zeros((mesh.n_elements, nv))
    for cls in classes:
        loads[cls.elements] = _element_loads(mesh, cls, problem.f, config.chunk)
    t1 = time.perf_counter()
    system = build_trace_system(mesh, classes, loads, k, problem.g, degree)
    x, info = solve_trace_system(system, config)
    t2 = time.perf_counter()
    nm = 2 * (k + 1)
    uhat = x.reshape(mesh.n_edges, nm)
    sigma = np.zeros((mesh.n_elements, ns))
    u = np.zeros((mesh.n_elements, nv))
    for cls in classes:
        el = cls.elements
        X, Y = cls.local.factors["X"], cls.local.factors["Y"]
        xl = _gather_uhat(mesh, k, el, uhat) @ X.T + loads[el] @ Y.T
        sigma[el] = xl[:, :ns]
        u[el] = xl[:, ns:]
    info.update(
        n_trace_dofs=int(mesh.n_edges * nm),
        n_classes=len(classes),
        t_local=t1 - t0,
        t_solve=t2 - t1,
        degree=degree,
    )
    fields = SolutionFields(mesh, k, variant, classes, which, sigma, u, uhat, loads, info=info)
    if postprocess:
        postprocess_displacement(fields, mesh, k)
    return fields


def postprocess_displacement(fields, mesh=None, k=None):
    """Attach the local ``P_{k+1}`` reconstruction ``u*`` to ``fields``."""
    mesh = mesh or fields.mesh
    out = None
    for cls in fields.classes:
        if cls.post is None:
            cls.post = PostprocessOperator(cls.basis)
        el = cls.elements
        us = cls.post.apply(fields.u[el], fields.local_uhat(el))
        if out is None:
            out = np.zeros((mesh.n_elements,) + us.shape[1:])
        out[el] = us
    fields.ustar = out
    return fields
