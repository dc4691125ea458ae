"""The canonical tilde spaces, the HDG projection and stability constants."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConditioningError
from ..spaces.bases import legendre_on_edge
from ..spaces.fields import FROB, normal_trace
from .linalg import RANK_TOL, column_basis, nullspace, rank
from .sampler import LocalSampler


def _orth_coords(mat, what):
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    r, _ = rank(mat, RANK_TOL, what)
    return vt[:r].T / s[:r]


@dataclass
class TildeSpaces:
    """Coordinates of the canonical subspaces.

    ``T`` and ``TV`` map orthonormal coordinates to basis coefficients of
    ``Sigma`` and ``V``.  ``eps_v``, ``sbb``, ``sigma_tilde``, ``sigma_perp``,
    ``v_tilde`` and ``v_perp`` are orthonormal column bases in those
    orthonormal coordinates.
    """

    T: np.ndarray
    TV: np.ndarray
    eps_v: np.ndarray
    sbb: np.ndarray
    sigma_tilde: np.ndarray
    sigma_perp: np.ndarray
    v_tilde: np.ndarray
    v_perp: np.ndarray
    sbb_residual: float


def canonical_tilde_spaces(spaces, sampler=None):
    """``Sigma~ = eps(V) + Sigma_sbb`` and ``V~ = div Sigma``."""
    sampler = sampler or LocalSampler(spaces)
    sig, v = sampler.sigma, sampler.v
    T = _orth_coords(sig.vol, "dim Sigma")
    TV = _orth_coords(v.vol, "dim V")
    Q = sig.vol @ T
    QV = v.vol @ TV
    eps_coef = Q.T @ v.eps
    eps_v, _ = column_basis(eps_coef, RANK_TOL, "eps(V)")
    constraint = np.vstack([sig.div @ T, sig.trace() @ T])
    sbb, _ = nullspace(constraint, RANK_TOL, "Sigma_sbb")
    sbb_res = float(np.linalg.norm(constraint @ sbb)) if sbb.size else 0.0
    st, _ = column_basis(np.hstack([eps_v, sbb]), RANK_TOL, "Sigma~")
    sp, _ = nullspace(st.T, RANK_TOL, "Sigma~ complement") if st.size else (np.eye(T.shape[1]), None)
    div_coef = QV.T @ (sig.div @ T)
    vt, _ = column_basis(div_coef, RANK_TOL, "div Sigma")
    vp, _ = nullspace(vt.T, RANK_TOL, "V~ complement") if vt.size else (np.eye(TV.shape[1]), None)
    return TildeSpaces(T, TV, eps_v, sbb, st, sp, vt, vp, sbb_res)


class ProjectionOperator:
    """Batched HDG projection on one element shape.

    Built once per shape; ``apply`` maps samples of ``sigma`` and ``u`` at
    the operator's volume and edge points to basis coefficients of the
    projections.  Sample arrays may carry a leading batch dimension.
    """

    def __init__(self, spaces, alpha=1.0, degree=None, sampler=None):
        self.spaces = spaces
        self.alpha = float(alpha)
        sampler = sampler or LocalSampler(spaces, degree)
        self.sampler = sampler
        poly = spaces.polygon
        k = spaces.trace_degree
        ts = canonical_tilde_spaces(spaces, sampler)
        self.tilde = ts
        sig, v = sampler.sigma, sampler.v
        T, TV = ts.T, ts.TV
        self.rule = sig.rule
        w = self.rule.weights
        nq = len(w)
        # orthonormal basis values at volume points
        self.phi_s = (sig.vol @ T).reshape(nq, 3, -1) / (np.sqrt(w)[:, None, None] * np.sqrt(FROB)[None, :, None])
        self.phi_v = (v.vol @ TV).reshape(nq, 2, -1) / np.sqrt(w)[:, None, None]
        self.edge_points = []
        self.edge_weights = []
        self.edge_legendre = []
        C_blocks, R_blocks = [], []
        for e in range(poly.ne):
            pts, we, s = poly.edge_rule(e, sampler.degree)
            self.edge_points.append(pts)
            self.edge_weights.append(we)
            self.edge_legendre.append(legendre_on_edge(k, s, poly.edge_lengths[e]))
            # (nf, k+1, 2) -> (nf, 2(k+1)) ordered comp-major
            cs = np.transpose(sig.edge_coef[e], (0, 2, 1)).reshape(sig.n, -1)
            cv = np.transpose(v.edge_coef[e], (0, 2, 1)).reshape(v.n, -1)
            C_blocks.append(T.T @ cs)
            R_blocks.append(TV.T @ cv)
        C = np.hstack(C_blocks)
        R = np.hstack(R_blocks)
        ns, nv = T.shape[1], TV.shape[1]
        st, vt = ts.sigma_tilde, ts.v_tilde
        top = np.hstack([st.T, np.zeros((st.shape[1], nv))])
        mid = np.hstack([np.zeros((vt.shape[1], ns)), vt.T])
        bot = np.hstack([C.T, -self.alpha * R.T])
        L = np.vstack([top, mid, bot])
        self.matrix = L
        self.shape_ok = L.shape[0] == L.shape[1]
        if not self.shape_ok:
            raise ConditioningError(
                f"projection system is {L.shape[0]}x{L.shape[1]}; the spaces are not an M-decomposition"
            )
        sv = np.linalg.svd(L, compute_uv=False)
        if sv[-1] < 1e-10 * sv[0]:
            raise ConditioningError("projection system is singular; the spaces are not an M-decomposition")
        self.cond = sv[0] / sv[-1]
        self.Linv = np.linalg.inv(L)
        self.ns, self.nv = ns, nv

    def rhs(self, sig_vol, u_vol, sig_edges, u_edges):
        """Right-hand side from samples (optionally batched over elements)."""
        w = self.rule.weights
        ts = self.tilde
        s = np.einsum("...qc,qcj,q,c->...j", sig_vol, self.phi_s, w, FROB)
        su = np.einsum("...qc,qcj,q->...j", u_vol, self.phi_v, w)
        parts = [s @ ts.sigma_tilde, su @ ts.v_tilde]
        g = []
        poly = self.spaces.polygon
        for e in range(poly.ne):
            tn = normal_trace(sig_edges[e], poly.normals[e]) - self.alpha * u_edges[e]
            P = self.edge_legendre[e]
            we = self.edge_weights[e]
            coef = np.einsum("...qc,qn,q->...cn", tn, P, we)
            g.append(coef.reshape(coef.shape[:-2] + (-1,)))
        parts.append(np.concatenate(g, axis=-1))
        return np.concatenate(parts, axis=-1)

    def apply(self, sig_vol, u_vol, sig_edges, u_edges):
        """Orthonormal coordinates ``(a, b)`` of the projections."""
        sol = self.rhs(sig_vol, u_vol, sig_edges, u_edges) @ self.Linv.T
        return sol[..., : self.ns], sol[..., self.ns :]

    def to_basis(self, a, b):
        """Basis coefficients of ``Pi sigma`` and ``Pi u``."""
        return a @ self.tilde.T.T, b @ self.tilde.TV.T

    def sample_fields(self, sigma, u, shift=None):
        """Samples of exact fields at the operator's points, shifted by ``shift``."""
        shift = np.zeros(2) if shift is None else np.asarray(shift)
        sv = sigma(self.rule.points + shift)
        uv = u(self.rule.points + shift)
        se = [sigma(p + shift) for p in self.edge_points]
        ue = [u(p + shift) for p in self.edge_points]
        return sv, uv, se, ue


@dataclass
class ProjectionDiagnostic:
    """Coefficients of ``Pi sigma`` and ``Pi u`` and defining-equation residuals."""

    sigma_coef: np.ndarray
    u_coef: np.ndarray
    residuals: dict
    tilde: TildeSpaces
    condition: float
    notes: list = field(default_factory=list)


def hdg_project(exact_sigma, exact_u, spaces, alpha_scalar=1.0, degree=None, operator=None):
    """HDG projection of ``(sigma, u)`` on the reference element of ``spaces``.

    ``exact_sigma`` and ``exact_u`` are tensor and vector fields (or callables
    returning (N, 3) and (N, 2) arrays).
    """
    op = operator or ProjectionOperator(spaces, alpha_scalar, degree)
    sv, uv, se, ue = op.sample_fields(exact_sigma, exact_u)
    a, b = op.apply(sv, uv, se, ue)
    rhs = op.rhs(sv, uv, se, ue)
    sol = np.concatenate([a, b])
    res = np.linalg.norm(op.matrix @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
    sc, uc = op.to_basis(a, b)
    return ProjectionDiagnostic(sc, uc, {"defining_equations": float(res)}, op.tilde, float(op.cond))


def reproject(diag, spaces, operator=None, alpha_scalar=1.0):
    """Project the discrete fields described by ``diag`` again (idempotence test)."""
    from ..spaces.fields import TensorField, VectorField

    sig_field = TensorField.combine(diag.sigma_coef, spaces.stress_basis)
    u_comps = list(zip(*[f.components for f in spaces.displacement_basis]))

    def u_eval(points):
        out = np.zeros((len(points), 2))
        for c, f in zip(diag.u_coef, spaces.displacement_basis):
            out += c * f(points)
        return out

    return hdg_project(sig_field, u_eval, spaces, alpha_scalar, operator=operator)


@dataclass
class StabilityConstants:
    C_sigma_perp: float
    C_v_perp: float
    C_eps_v: float
    C_div_sigma: float
    a_v_perp: float
    alpha_norm: float

    def to_dict(self):
        return {k: (None if not np.isfinite(v) else v) for k, v in self.__dict__.items()}


def _extreme(mat_trace, basis, which):
    if basis.shape[1] == 0:
        return None
    B = mat_trace @ basis
    ev = np.linalg.eigvalsh(B.T @ B)
    return ev[0] if which == "min" else ev[-1]


def stability_constants(spaces, alpha_scalar=1.0, degree=None, sampler=None):
    """Inverse-inequality constants of the local spaces, normalized by the diameter."""
    sampler = sampler or LocalSampler(spaces, degree)
    ts = canonical_tilde_spaces(spaces, sampler)
    sig, v = sampler.sigma, sampler.v
    h = spaces.polygon.diameter
    Ts = sig.trace() @ ts.T
    Tv = v.trace() @ ts.TV

    def inv_sqrt(x):
        if x is None:
            return 0.0
        return np.inf if x <= 1e-13 else 1.0 / np.sqrt(x)

    lam_s = _extreme(Ts, ts.sigma_perp, "min")
    lam_v = _extreme(Tv, ts.v_perp, "min")
    lam_e = _extreme(Ts, ts.eps_v, "max")
    lam_d = _extreme(Tv, ts.v_tilde, "max")
    C_sp = h**-0.5 * inv_sqrt(lam_s)
    C_vp = h**-0.5 * inv_sqrt(lam_v)
    C_e = h**0.5 * np.sqrt(lam_e) if lam_e is not None else 0.0
    C_d = h**0.5 * np.sqrt(lam_d) if lam_d is not None else 0.0
    if ts.v_perp.shape[1] == 0:
        a, na = np.inf, 0.0
    else:
        a, na = float(alpha_scalar), float(alpha_scalar)
    return StabilityConstants(float(C_sp), float(C_vp), float(C_e), float(C_d), a, na)
