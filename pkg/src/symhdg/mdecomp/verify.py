"""Indices, inclusion checks, ordered kernels and fill-space certification."""

from __future__ import annotations

import numpy as np

from ..spaces.element import ElementSpaces
from .linalg import RANK_TOL, column_basis, nullspace, projection_residual, rank
from .report import MDecompReport
from .sampler import LocalSampler, TensorSamples, VectorSamples, membership_residual

INCLUSION_TOL = 1e-8


def _dim_p_edge(n):
    return max(n + 1, 0)


def _dim_p_area(n):
    return (n + 1) * (n + 2) // 2 if n >= 0 else 0


def theta_of(k, ne):
    return min(k, 2 * ne - 4)


def closed_form_index(k, ne):
    """``I_M`` of ``P_k(K;S) x P_k(K)`` on an ``ne``-gon with ``M = P_k(dK)``."""
    th = theta_of(k, ne)
    return 2 * (th + 1) * ne - (th + 3) * (th + 4) // 2


def closed_form_edge_index(k, ne, i):
    """Per-edge index for the ``P_k`` family, 1-based edge ``i``."""
    return (
        min(k + 1, 2 * i - 4)
        + min(k + 1, 2 * i - 3)
        + 3 * (i == 1)
        - 3 * (i == ne)
    )


def subspace_rank(fields, poly, form="volume", tol=RANK_TOL, k=None, degree=None):
    """Rank of a list of fields under the volume or boundary-trace L2 form.

    ``fields`` may hold tensor or vector fields (not mixed).
    """
    from ..spaces.fields import TensorField

    k = 1 if k is None else k
    degree = degree or (2 * k + 8)
    cls = TensorSamples if isinstance(fields[0], TensorField) else VectorSamples
    s = cls(fields, poly, k, degree)
    mat = s.vol if form == "volume" else s.trace()
    return rank(mat, tol, f"{form} rank")


class _Kernels:
    """Orthonormal coordinates and kernels for one local space."""

    def __init__(self, sampler, report):
        self.sampler = sampler
        sig = sampler.sigma
        v = sampler.v
        # orthonormal coordinates of Sigma: columns T with (vol @ T) orthonormal
        u, s, vt = np.linalg.svd(sig.vol, full_matrices=False)
        r, cert = rank(sig.vol, RANK_TOL, "dim Sigma")
        report.add_cert(cert)
        self.T = vt[:r].T / s[:r]
        self.dim_sigma = r
        uv, sv, vtv = np.linalg.svd(v.vol, full_matrices=False)
        rv, cert = rank(v.vol, RANK_TOL, "dim V")
        report.add_cert(cert)
        self.TV = vtv[:rv].T / sv[:rv]
        self.dim_v = rv
        # divergence-free subspace
        N, cert = nullspace(sig.div @ self.T, RANK_TOL, "div kernel of Sigma")
        report.add_cert(cert)
        self.sigma_s = self.T @ N
        # rigid motions in V
        Nv, cert = nullspace(v.eps @ self.TV, RANK_TOL, "eps kernel of V")
        report.add_cert(cert)
        self.v_rm = self.TV @ Nv
        self.div_rank, cert = rank(sig.div @ self.T, RANK_TOL, "dim div Sigma")
        report.add_cert(cert)


def compute_indices(spaces: ElementSpaces, shape=None, degree=None, report=None, sampler=None):
    """``I_M``, ``I_S`` and per-edge indices of ``spaces``."""
    shape = shape or spaces.polygon
    report = report or MDecompReport()
    sampler = sampler or LocalSampler(spaces, degree)
    ker = _Kernels(sampler, report)
    sig, v = sampler.sigma, sampler.v
    tr_s, cert = rank(sig.trace() @ ker.sigma_s, RANK_TOL, "dim trace Sigma_s")
    report.add_cert(cert)
    tr_rm, cert = rank(v.trace() @ ker.v_rm, RANK_TOL, "dim trace V_rm")
    report.add_cert(cert)
    dim_m = sampler.dim_m
    report.dims.update(
        {
            "Sigma": ker.dim_sigma,
            "V": ker.dim_v,
            "M": dim_m,
            "Sigma_s": ker.sigma_s.shape[1],
            "V_rm": ker.v_rm.shape[1],
            "div_Sigma": ker.div_rank,
            "trace_Sigma_s": tr_s,
            "trace_V_rm": tr_rm,
        }
    )
    report.I_M = dim_m - tr_s - tr_rm
    report.I_S = ker.dim_v - ker.div_rank
    report.theta = theta_of(spaces.k, shape.ne)
    levels = ordered_kernels(spaces, shape, sampler=sampler, kernels=ker, report=report)
    per_edge = []
    for lev in levels[: shape.ne]:
        rm = tr_rm if lev["i"] == shape.ne else 0
        per_edge.append(spaces.trace_dim - lev["trace_dim"] - rm)
    report.per_edge = per_edge
    if sum(per_edge) != report.I_M:
        report.notes.append(f"per-edge indices sum to {sum(per_edge)}, not I_M = {report.I_M}")
    if spaces.family == "P" and spaces.variant == "hdg":
        expected = [closed_form_edge_index(spaces.k, shape.ne, i) for i in range(1, shape.ne + 1)]
        if per_edge != expected:
            report.notes.append(f"per-edge indices {per_edge} differ from the closed form {expected}")
    report._kernels = ker
    report._levels = levels
    return report


def ordered_kernels(base, shape=None, sampler=None, kernels=None, report=None):
    """Nested divergence-free subspaces with vanishing traces on the first edges.

    Returns one dict per 1-based ``i = 1 .. ne+1`` with the coefficient basis
    (columns in the stress basis of ``base``), its dimension and the rank of
    its trace on edge ``i``.  For the ``P_k`` family the Cor.-style counts
    ``dim P_{k+4-2i}(e) + dim P_{k+3-2i}(e) - 3 delta_{1i}`` are attached as
    ``expected_trace_dim`` and ``expected_dim``.
    """
    shape = shape or base.polygon
    report = report if report is not None else MDecompReport()
    sampler = sampler or LocalSampler(base)
    ker = kernels or _Kernels(sampler, report)
    sig = sampler.sigma
    k = base.k
    ne = shape.ne
    current = ker.sigma_s
    out = []
    for i in range(1, ne + 2):
        entry = {"i": i, "basis": current, "dim": current.shape[1]}
        if i <= ne:
            tr = sig.edge[i - 1] @ current
            r, cert = rank(tr, RANK_TOL, f"dim trace_{i} Sigma_s,{i}")
            report.add_cert(cert)
            entry["trace_dim"] = r
        if base.family == "P" and base.variant == "hdg" and i <= ne:
            entry["expected_trace_dim"] = _dim_p_edge(k + 4 - 2 * i) + _dim_p_edge(k + 3 - 2 * i) - 3 * (i == 1)
            entry["expected_dim"] = _dim_p_area(k + 4 - 2 * i) - 3 * (i == 1)
            if entry["expected_trace_dim"] != entry.get("trace_dim") and i < ne:
                report.notes.append(
                    f"edge {i}: trace dimension {entry.get('trace_dim')} vs count {entry['expected_trace_dim']}"
                )
        out.append(entry)
        if i <= ne:
            tr = sig.edge[i - 1] @ current
            # orthonormal coordinates inside the current kernel keep SVD scales sane
            N, cert = nullspace(tr, RANK_TOL, f"Sigma_s,{i + 1}")
            current = current @ N
    return out


def verify_mdecomposition(spaces: ElementSpaces, shape=None, degree=None):
    """Check inclusions (a), (b), the index condition (c) and kernel orthogonality."""
    shape = shape or spaces.polygon
    report = MDecompReport()
    sampler = LocalSampler(spaces, degree)
    compute_indices(spaces, shape, degree, report, sampler)
    ker = report._kernels
    sig, v = sampler.sigma, sampler.v
    res_sig = membership_residual(sig)
    res_v = membership_residual(v)
    report.residuals["trace_Sigma_in_M"] = res_sig
    report.residuals["trace_V_in_M"] = res_v
    report.passes["a_trace_in_M"] = max(res_sig, res_v) < INCLUSION_TOL
    eps_res = projection_residual(v.eps, sig.vol)
    div_res = projection_residual(sig.div, v.vol)
    report.residuals["eps_V_in_Sigma"] = eps_res
    report.residuals["div_Sigma_in_V"] = div_res
    report.passes["b_eps_V_in_Sigma"] = eps_res < INCLUSION_TOL
    report.passes["b_div_Sigma_in_V"] = div_res < INCLUSION_TOL
    report.passes["c_index_zero"] = report.I_M == 0
    # kernels' trace decomposition
    A, _ = column_basis(sig.trace() @ ker.sigma_s, RANK_TOL, "trace Sigma_s basis")
    B, _ = column_basis(v.trace() @ ker.v_rm, RANK_TOL, "trace V_rm basis")
    cross = float(np.linalg.norm(A.T @ B, 2)) if A.size and B.size else 0.0
    report.residuals["kernel_trace_cross_gram"] = cross
    report.passes["kernel_traces_orthogonal"] = cross < 1e-9
    if report.passes["c_index_zero"]:
        report.passes["kernel_trace_decomposition"] = (
            report.dims["trace_Sigma_s"] + report.dims["trace_V_rm"] == report.dims["M"]
        )
    if not report.passes["c_index_zero"]:
        report.notes.append(f"index condition fails with I_M = {report.I_M}")
    return report


def _fill_ranks(samples, edges=None):
    mat = samples.trace(edges)
    return mat


def verify_fill_properties(fill, base: ElementSpaces, kind="fillM", shape=None, degree=None, tol=INCLUSION_TOL):
    """Certify a fill space against a polynomial base space.

    fillM: traces in M, divergence free, trace intersection with the base
    divergence-free kernel trivial, ``dim = dim trace = I_M``; when members
    carry edge groups the per-edge properties are checked too.
    fillV: traces in M, divergence in V, divergence intersection trivial,
    ``dim = dim div = I_S``.
    """
    shape = shape or base.polygon
    report = MDecompReport()
    sampler = LocalSampler(base, degree)
    compute_indices(base, shape, degree, report, sampler)
    ker = report._kernels
    sig, v = sampler.sigma, sampler.v
    fs = sampler.tensors(fill)
    h = shape.diameter
    report.dims["fill"] = len(fill)
    res = membership_residual(fs)
    report.residuals["trace_fill_in_M"] = res
    report.passes["trace_in_M"] = res < tol
    dim_fill, cert = rank(fs.vol, RANK_TOL, "dim fill")
    report.add_cert(cert)
    report.dims["fill_rank"] = dim_fill
    if kind == "fillM":
        div_norm = np.linalg.norm(fs.div, axis=0) * h
        vol_norm = np.linalg.norm(fs.vol, axis=0)
        div_rel = float(np.max(div_norm / vol_norm))
        report.residuals["div_fill"] = div_rel
        report.passes["divergence_free"] = div_rel < tol
        g_base = sig.trace() @ ker.sigma_s
        r_base, c1 = rank(g_base, RANK_TOL, "dim trace Sigma_g,s")
        r_fill, c2 = rank(fs.trace(), RANK_TOL, "dim trace fill")
        r_both, c3 = rank(np.hstack([_unit(g_base), _unit(fs.trace())]), RANK_TOL, "dim trace sum")
        for c in (c1, c2, c3):
            report.add_cert(c)
        report.dims["fill_trace_rank"] = r_fill
        report.passes["trace_intersection_trivial"] = r_both == r_base + r_fill
        report.passes["dim_equals_trace_dim"] = dim_fill == r_fill == len(fill)
        report.passes["dim_equals_I_M"] = dim_fill == report.I_M
        groups = [f.group for f in fill]
        if all(g is not None for g in groups):
            _per_edge_checks(report, fill, fs, sampler, shape, tol)
    elif kind == "fillV":
        div_res = projection_residual(fs.div, v.vol)
        report.residuals["div_fill_in_V"] = div_res
        report.passes["div_in_V"] = div_res < tol
        r_base, c1 = rank(sig.div, RANK_TOL, "dim div Sigma_g")
        r_fill, c2 = rank(fs.div, RANK_TOL, "dim div fill")
        r_both, c3 = rank(np.hstack([_unit(sig.div), _unit(fs.div)]), RANK_TOL, "dim div sum")
        for c in (c1, c2, c3):
            report.add_cert(c)
        report.dims["fill_div_rank"] = r_fill
        report.passes["div_intersection_trivial"] = r_both == r_base + r_fill
        report.passes["dim_equals_div_dim"] = dim_fill == r_fill == len(fill)
        report.passes["dim_equals_I_S"] = dim_fill == report.I_S
    else:
        raise ValueError(f"unknown fill kind {kind!r}")
    return report


def _unit(mat):
    """Orthonormal basis of the column space, for well-scaled rank sums."""
    if mat.shape[1] == 0:
        return mat
    q, _ = column_basis(mat, RANK_TOL, "normalize")
    return q


def _per_edge_checks(report, fill, fs, sampler, shape, tol):
    levels = report._levels
    sig = sampler.sigma
    ne = shape.ne
    total = np.linalg.norm(fs.trace(), axis=0)
    ok1 = ok2 = okd = True
    for i in range(1, ne + 1):
        idx = [n for n, f in enumerate(fill) if f.group == i]
        if not idx:
            if report.per_edge[i - 1] != 0:
                okd = False
            continue
        sub = fs.trace(range(i - 1))[:, idx] if i > 1 else np.zeros((0, len(idx)))
        if sub.size:
            rel = np.linalg.norm(sub, axis=0) / np.maximum(total[idx], 1e-300)
            if rel.max() >= tol:
                ok1 = False
                report.notes.append(f"group {i}: trace on earlier edges {rel.max():.1e}")
        gi = fs.edge[i - 1][:, idx]
        base_i = sig.edge[i - 1] @ levels[i - 1]["basis"]
        r_b, _ = rank(base_i, RANK_TOL, "edge base")
        r_f, _ = rank(gi, RANK_TOL, "edge fill")
        r_s, _ = rank(np.hstack([_unit(base_i), _unit(gi)]), RANK_TOL, "edge sum")
        if r_s != r_b + r_f:
            ok2 = False
        r_vol, _ = rank(fs.vol[:, idx], RANK_TOL, "group dim")
        if not (r_vol == r_f == report.per_edge[i - 1]):
            okd = False
            report.notes.append(
                f"group {i}: dim {r_vol}, edge trace dim {r_f}, per-edge index {report.per_edge[i - 1]}"
            )
    report.passes["gamma1_earlier_edges_zero"] = ok1
    report.passes["gamma2_edge_intersection_trivial"] = ok2
    report.passes["delta_group_dims"] = okd
