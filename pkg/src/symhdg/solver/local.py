"""Element-local HDG blocks, static condensation and shape-class caches.

Unknowns on an element are the coefficients of ``sigma_h`` and ``u_h`` in
orthonormal (L2(K)) bases of ``Sigma(K)`` and ``V(K)``, and the coefficients
of ``u_hat`` in orthonormal Legendre bases on each local edge, ordered
``[edge j][component c][degree n]``.  With ``D = diag(I, -I)`` the local
equations read ``L x = G u_hat + [0; F]`` and the transmission functional is
``G^T D x + M_alpha u_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConditioningError
from ..geometry.polygon import Polygon
from ..geometry.quadrature import QuadratureRule, triangle_rule_on
from ..spaces.bases import legendre_on_edge, p_exponents, scalar_basis
from ..spaces.element import enriched_stress_basis
from ..spaces.fields import FROB
from ..spaces.sampling import (
    orthonormalizer,
    richardson_check,
    sample_edge_traces,
    sample_tensors,
    sample_vectors,
    tensor_gram,
    vector_gram,
)


def default_degree(k):
    """Quadrature degree for load integrals."""
    return 2 * k + 8


def enrichment_degree(k):
    """Graded-rule degree for volume integrals involving enrichment fields.

    ``2k + 8`` leaves a 1e-8 Richardson gap for the lowest rational bubbles;
    degree 14 brings it below 1e-11.
    """
    return max(default_degree(k), 14)


class ElementBasis:
    """Orthonormalized local bases of one element shape, centred at its centroid.

    Everything here is translation invariant, so one instance serves every
    element of a mesh that is a translate of ``vertices``.
    """

    def __init__(self, vertices, k, variant="hdg-m", degree=None, check=True):
        vertices = np.asarray(vertices, dtype=float)
        centroid = vertices.mean(axis=0)
        self.centroid = centroid
        self.k = int(k)
        self.variant = variant
        self.degree = int(degree or enrichment_degree(k))
        self.load_degree = max(default_degree(k), self.degree if degree else 0)
        self.polygon = Polygon(vertices - centroid, center=[0.0, 0.0])
        self.spaces = enriched_stress_basis(self.polygon, self.k, variant)
        self.nm_edge = self.spaces.trace_dim
        self.rule = self.polygon.volume_rule(self.degree, graded=True)
        vals_s, div_s = sample_tensors(self.spaces.stress_basis, self.rule)
        vals_v, _ = sample_vectors(self.spaces.displacement_basis, self.rule)
        w = self.rule.weights
        if check:
            richardson_check(self._raw_gram, self.degree, self.degree + 4, 1e-9, "stress Gram matrix")
        self.Rinv_s = orthonormalizer(tensor_gram(vals_s, w), what="stress basis")
        self.Rinv_v = orthonormalizer(vector_gram(vals_v, w), what="displacement basis")
        self.ns = self.Rinv_s.shape[1]
        self.nv = self.Rinv_v.shape[1]
        self.phi_s = np.einsum("iqc,ij->qcj", vals_s, self.Rinv_s)
        self.div_s = np.einsum("iqc,ij->qcj", div_s, self.Rinv_s)
        self.phi_v = np.einsum("iqc,ij->qcj", vals_v, self.Rinv_v)
        self.edges = [self._edge_data(e) for e in range(3)]
        self.load_rule = self._plain_rule(self.load_degree)
        self.phi_v_load = self.vector_values(self.load_rule.points)

    def _raw_gram(self, degree):
        rule = self.polygon.volume_rule(degree, graded=True)
        vals, _ = sample_tensors(self.spaces.stress_basis, rule)
        return tensor_gram(vals, rule.weights)

    def _plain_rule(self, degree):
        pts, wts = triangle_rule_on(self.polygon.vertices, degree, graded=False)
        return QuadratureRule(pts, wts, degree, np.zeros(len(wts), dtype=int))

    def _edge_data(self, e):
        poly = self.polygon
        tr_s, we, s = sample_edge_traces(self.spaces.stress_basis, poly, e, self.degree, "tensor")
        tr_v, _, _ = sample_edge_traces(self.spaces.displacement_basis, poly, e, self.degree, "vector")
        return {
            "points": poly.edge_rule(e, self.degree)[0],
            "weights": we,
            "s": s,
            "legendre": legendre_on_edge(self.k, s, poly.edge_lengths[e]),
            "tn": np.einsum("iqc,ij->qcj", tr_s, self.Rinv_s),
            "v": np.einsum("iqc,ij->qcj", tr_v, self.Rinv_v),
            "normal": poly.normals[e],
            "length": poly.edge_lengths[e],
        }

    @property
    def nm(self):
        return 3 * self.nm_edge

    def stress_values(self, points):
        """Orthonormal stress basis at element-relative points, (nq, 3, ns)."""
        vals, _ = sample_tensors(self.spaces.stress_basis, points, 0)
        return np.einsum("iqc,ij->qcj", vals, self.Rinv_s)

    def vector_values(self, points):
        """Orthonormal displacement basis at element-relative points, (nq, 2, nv)."""
        vals, _ = sample_vectors(self.spaces.displacement_basis, points, 0)
        return np.einsum("iqc,ij->qcj", vals, self.Rinv_v)

    def error_rule(self, degree=None):
        return self.polygon.volume_rule(degree or self.degree, graded=True)


@dataclass
class LocalSystem:
    """Blocks of the element matrix in orthonormal local coordinates.

    ``A = (A sigma, tau)``, ``B = (u, div tau)``, ``C = <u_hat, tau n>``,
    ``S = <alpha u, v>``, ``R = <alpha u_hat, v>``, ``M = <alpha u_hat, mu>``
    and ``load = (f, v)`` (zero when no load was given).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    S: np.ndarray
    R: np.ndarray
    M: np.ndarray
    load: np.ndarray
    asymmetry: float = 0.0
    factors: dict = field(default_factory=dict)

    @property
    def ns(self):
        return self.A.shape[0]

    @property
    def nv(self):
        return self.S.shape[0]

    @property
    def matrix(self):
        """``L`` acting on ``[sigma; u]``."""
        return np.block([[self.A, self.B], [-self.B.T, self.S]])

    @property
    def coupling(self):
        """``G`` with ``L x = G u_hat + [0; F]``."""
        return np.vstack([self.C, self.R])

    def monolithic(self):
        """Full matrix on ``[sigma; u; u_hat]`` with the transmission row (symmetric form)."""
        L, G = self.matrix, self.coupling
        D = np.diag(np.r_[np.ones(self.ns), -np.ones(self.nv)])
        return np.block([[D @ L, -D @ G], [-G.T @ D, -self.M]])


def local_blocks(basis, material, alpha=1.0):
    """Material-dependent blocks of one shape class (no load)."""
    w = basis.rule.weights
    a_phi = material.apply_compliance(np.moveaxis(basis.phi_s, 1, 2))
    A_raw = np.einsum("q,c,qjc,qci->ij", w, FROB, a_phi, basis.phi_s)
    asym = float(np.abs(A_raw - A_raw.T).max())
    A = 0.5 * (A_raw + A_raw.T)
    B = np.einsum("q,qci,qcj->ij", w, basis.div_s, basis.phi_v)
    k1 = basis.k + 1
    C = np.zeros((basis.ns, basis.nm))
    R = np.zeros((basis.nv, basis.nm))
    S = np.zeros((basis.nv, basis.nv))
    for e, ed in enumerate(basis.edges):
        we, P = ed["weights"], ed["legendre"]
        sl = slice(e * 2 * k1, (e + 1) * 2 * k1)
        C[:, sl] = np.einsum("q,qci,qn->icn", we, ed["tn"], P).reshape(basis.ns, -1)
        R[:, sl] = alpha * np.einsum("q,qci,qn->icn", we, ed["v"], P).reshape(basis.nv, -1)
        S += alpha * np.einsum("q,qci,qcj->ij", we, ed["v"], ed["v"])
    S = 0.5 * (S + S.T)
    M = alpha * np.eye(basis.nm)
    ev = np.linalg.eigvalsh(A)
    if ev[0] <= 1e-12 * ev[-1]:
        raise ConditioningError("compliance block is singular")
    return LocalSystem(A, B, C, S, R, M, np.zeros(basis.nv), asym)


def assemble_local(element, spaces=None, material=None, f=None, alpha_scalar=1.0, variant="hdg-m", k=1, degree=None):
    """Local system of one triangle ``element`` (3x2 vertex array).

    ``spaces`` may be an :class:`ElementBasis` built for a translate of the
    element; otherwise one is built from ``k`` and ``variant``.  ``f`` is a
    callable returning (N, 2) load values at physical points.
    """
    element = np.asarray(element, dtype=float)
    basis = spaces if isinstance(spaces, ElementBasis) else ElementBasis(element, k, variant, degree)
    local = local_blocks(basis, material, alpha_scalar)
    if f is not None:
        shift = element.mean(axis=0)
        fv = np.asarray(f(basis.load_rule.points + shift))
        local.load = np.einsum("q,qc,qcj->j", basis.load_rule.weights, fv, basis.phi_v_load)
    condense(local)
    return local


def condense(local):
    """Schur complement onto the trace unknowns and the load reduction.

    Returns ``(K, Z)`` with ``K`` the symmetric condensed matrix and ``Z`` the
    map from the load vector ``F`` to the condensed right-hand side
    ``-G^T D L^{-1} [0; F]``.  Back-substitution factors ``X`` and ``Y``
    (``x = X u_hat + Y F``) are stored in ``local.factors``.
    """
    if "K" in local.factors:
        return local.factors["K"], local.factors["Z"]
    L = local.matrix
    G = local.coupling
    ns, nv = local.ns, local.nv
    rhs = np.hstack([G, np.vstack([np.zeros((ns, nv)), np.eye(nv)])])
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError:
        raise ConditioningError("local interior block is singular") from None
    X, Y = sol[:, : G.shape[1]], sol[:, G.shape[1] :]
    DG = G.copy()
    DG[ns:] *= -1.0
    K = local.M + DG.T @ X
    K = 0.5 * (K + K.T)
    Z = -DG.T @ Y
    local.factors.update(K=K, Z=Z, X=X, Y=Y)
    return K, Z


def expand(local, uhat, load=None):
    """Interior unknowns ``(sigma, u)`` from trace coefficients (batched)."""
    condense(local)
    X, Y = local.factors["X"], local.factors["Y"]
    x = np.asarray(uhat) @ X.T
    if load is not None:
        x = x + np.asarray(load) @ Y.T
    return x[..., : local.ns], x[..., local.ns :]


class PostprocessOperator:
    """Local ``P_{k+1}`` reconstruction with a mean-value Lagrange block.

    For each displacement component ``c`` solves
    ``(grad u*, grad w) = -(u_h, lap w) + <u_hat, grad w . n>`` for
    ``w`` in ``P_{k+1}`` together with ``(u*, 1) = (u_h, 1)``.
    """

    def __init__(self, basis):
        self.basis = basis
        k = basis.k
        poly = basis.polygon
        self.scalars = scalar_basis(p_exponents(k + 1), (0.0, 0.0), poly.diameter)
        nw = len(self.scalars)
        self.nw = nw
        rule = basis.load_rule
        w = rule.weights
        jets = [s.jet(rule.points, 2, 0) for s in self.scalars]
        val = np.array([j.value for j in jets])
        grad = np.array([[j.derivative(1, 0), j.derivative(0, 1)] for j in jets])
        lap = np.array([j.derivative(2, 0) + j.derivative(0, 2) for j in jets])
        Kw = np.einsum("q,icq,jcq->ij", w, grad, grad)
        m = val @ w
        aug = np.zeros((nw + 1, nw + 1))
        aug[:nw, :nw] = Kw
        aug[:nw, nw] = m
        aug[nw, :nw] = m
        sv = np.linalg.svd(aug, compute_uv=False)
        if sv[-1] < 1e-12 * sv[0]:
            raise ConditioningError("postprocessing system is singular")
        self.aug = aug
        aug_inv = np.linalg.inv(aug)
        phi = basis.phi_v_load
        k1 = k + 1
        self.maps = []
        for c in range(2):
            rhs_u = -np.einsum("q,iq,qj->ij", w, lap, phi[:, c, :])
            mean_u = np.einsum("q,qj->j", w, phi[:, c, :])
            rhs_h = np.zeros((nw, basis.nm))
            for e, ed in enumerate(basis.edges):
                g = np.array([s.jet(ed["points"], 1, 0) for s in self.scalars], dtype=object)
                dn = np.array([j.derivative(1, 0) * ed["normal"][0] + j.derivative(0, 1) * ed["normal"][1] for j in g])
                cols = e * 2 * k1 + c * k1 + np.arange(k1)
                rhs_h[:, cols] = np.einsum("q,iq,qn->in", ed["weights"], dn, ed["legendre"])
            full = np.zeros((nw + 1, basis.nv + basis.nm))
            full[:nw, : basis.nv] = rhs_u
            full[:nw, basis.nv :] = rhs_h
            full[nw, : basis.nv] = mean_u
            self.maps.append((aug_inv @ full)[:nw])

    def apply(self, u, uhat):
        """Coefficients (..., 2, nw) of ``u*`` from local ``u`` and ``u_hat``."""
        data = np.concatenate([u, uhat], axis=-1)
        return np.stack([data @ M.T for M in self.maps], axis=-2)

    def values(self, points):
        """Scalar basis values (nq, nw) at element-relative points."""
        return np.array([s(points, 0) for s in self.scalars]).T
