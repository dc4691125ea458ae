from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symhdg.errors import AmbiguousRankError, ConditioningError
from symhdg.experiments import manufactured_problem
from symhdg.geometry import build_unit_square_tri_mesh, reference_triangle, regular_polygon, unit_square
from symhdg.mdecomp import (
    ProjectionOperator,
    closed_form_edge_index,
    closed_form_index,
    compute_indices,
    hdg_project,
    ordered_kernels,
    rank,
    reproject,
    stability_constants,
    subspace_rank,
    theta_of,
    verify_fill_properties,
    verify_mdecomposition,
)
from symhdg.mdecomp.linalg import rank_decision
from symhdg.solver import ElementBasis
from symhdg.spaces import TensorField, enriched_stress_basis, fill_v_square, lam_field, polynomial_bases
from symhdg.spaces.fields import FROB, X_FIELD, constant

TRI = reference_triangle()


# rank primitives -----------------------------------------------------------


def test_rank_of_dependent_fields():
    zero = constant(0.0)
    fields = [TensorField.from_components(X_FIELD, zero, zero), TensorField.from_components(2.0 * X_FIELD, zero, zero)]
    r, cert = subspace_rank(fields, TRI)
    assert r == 1 and cert.gap > 1e6


def test_rank_of_quadratic_tensors():
    r, _ = subspace_rank(polynomial_bases(2)["tensor"], TRI, k=2)
    assert r == 18


def test_trace_rank_of_airy_pair():
    l1 = lam_field(TRI, 0)
    l2 = lam_field(TRI, 1)
    fields = [TensorField.airy(l1**2), TensorField.airy(l1**2 * l2)]
    r, _ = subspace_rank(fields, TRI, form="trace", k=3, degree=20)
    assert r == 2


def test_ambiguous_rank_raises():
    with pytest.raises(AmbiguousRankError):
        rank_decision([1.0, 2e-8, 1e-8])


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 6))
def test_rank_of_random_products(m, n, r):
    r = min(r, m, n)
    rng = np.random.default_rng(m * 100 + n * 10 + r)
    mat = rng.standard_normal((m, r)) @ rng.standard_normal((r, n)) if r else np.zeros((m, n))
    got, cert = rank(mat)
    assert got == r
    assert cert.to_dict()["rank"] == r


# indices ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "shape, k, variant, I_M, I_S",
    [
        (TRI, 1, "hdg", 2, 4),
        (TRI, 2, "hdg", 3, 6),
        (unit_square(), 1, "q", 6, 3),
        (unit_square(), 3, "q", 10, 3),
    ],
)
def test_index_examples(shape, k, variant, I_M, I_S):
    report = compute_indices(enriched_stress_basis(shape, k, variant))
    assert (report.I_M, report.I_S) == (I_M, I_S)


@pytest.mark.parametrize("ne", [3, 4, 5])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_per_edge_indices_sum_to_index(ne, k):
    shape = TRI if ne == 3 else regular_polygon(ne)
    report = compute_indices(enriched_stress_basis(shape, k, "hdg"))
    assert sum(report.per_edge) == report.I_M == closed_form_index(k, ne)
    assert report.per_edge == [closed_form_edge_index(k, ne, i) for i in range(1, ne + 1)]
    assert report.theta == theta_of(k, ne)


def test_per_edge_example_triangle_k1():
    assert [closed_form_edge_index(1, 3, i) for i in (1, 2, 3)] == [0, 1, 1]


def test_ordered_kernels_triangle_p1():
    levels = ordered_kernels(enriched_stress_basis(TRI, 1, "hdg"))
    assert len(levels) == 4
    assert levels[0]["dim"] == 7
    assert levels[0]["trace_dim"] == levels[0]["expected_trace_dim"] == 4
    assert [lev["dim"] for lev in levels] == [7, 3, 0, 0]


# full verification ------------------------------------------------------------


def test_unenriched_triangle_fails_index_condition():
    report = verify_mdecomposition(enriched_stress_basis(TRI, 1, "hdg"))
    assert report.I_M == 2
    assert report.passes["c_index_zero"] is False
    assert report.passes["a_trace_in_M"] and report.passes["b_eps_V_in_Sigma"]
    assert not report.pass_


@pytest.mark.parametrize("k", [1, 2, 3])
def test_enriched_triangle_passes(k):
    report = verify_mdecomposition(enriched_stress_basis(TRI, k, "hdg-m"))
    assert report.I_M == 0
    assert report.pass_, report.passes
    assert report.dims["trace_Sigma_s"] + report.dims["trace_V_rm"] == report.dims["M"]
    assert report.residuals["kernel_trace_cross_gram"] < 1e-9


def test_square_exponential_passes():
    report = verify_mdecomposition(enriched_stress_basis(unit_square(), 2, "q-exponential"))
    assert report.pass_, report.passes


def test_report_json_keys():
    data = json.loads(verify_mdecomposition(enriched_stress_basis(TRI, 1, "hdg-m")).to_json())
    for key in ("dims", "I_M", "I_S", "per_edge", "theta", "certificates", "pass"):
        assert key in data
    assert data["pass"] is True
    assert all(c["gap"] is None or c["gap"] >= 10 for c in data["certificates"])


def test_index_invariants_hold_when_inclusions_pass():
    for variant in ("hdg", "hdg-m"):
        report = verify_mdecomposition(enriched_stress_basis(TRI, 2, variant))
        if report.passes["a_trace_in_M"] and report.passes["b_eps_V_in_Sigma"]:
            assert report.I_M >= 0 and report.I_S >= 0
        assert report.passes["c_index_zero"] == (report.I_M == 0)


# fills -----------------------------------------------------------------------


def test_square_fill_v_k1():
    base = enriched_stress_basis(unit_square(), 1, "q")
    report = verify_fill_properties(fill_v_square(1), base, "fillV")
    assert report.dims["fill"] == 3
    assert report.pass_, report.passes


def test_bad_fill_reported_not_raised():
    base = enriched_stress_basis(TRI, 1, "hdg")
    bogus = [TensorField.from_components(X_FIELD**3, constant(0.0), constant(0.0), tag="enrichment")]
    report = verify_fill_properties(bogus, base, "fillM")
    assert not report.pass_
    assert report.passes["divergence_free"] is False
    assert report.passes["dim_equals_I_M"] is False


# projection and constants ---------------------------------------------------


@pytest.fixture(scope="module")
def p1m():
    spaces = enriched_stress_basis(TRI, 1, "hdg-m")
    return spaces, ProjectionOperator(spaces, 1.0)


def test_projection_fixes_discrete_fields(p1m, rng):
    spaces, op = p1m
    cs = rng.standard_normal(len(spaces.stress_basis))
    cu = rng.standard_normal(len(spaces.displacement_basis))
    sig = TensorField.combine(cs, spaces.stress_basis)

    def u(points):
        return sum(c * f(points) for c, f in zip(cu, spaces.displacement_basis))

    diag = hdg_project(sig, u, spaces, operator=op)
    assert diag.residuals["defining_equations"] < 1e-12
    assert np.allclose(diag.sigma_coef, cs, atol=1e-9 * np.abs(cs).max())
    assert np.allclose(diag.u_coef, cu, atol=1e-9 * np.abs(cu).max())


def test_projection_of_rigid_motion(p1m):
    spaces, op = p1m

    def u(points):
        x, y = points.T
        return np.column_stack([0.3 - 0.7 * y, -1.1 + 0.7 * x])

    diag = hdg_project(lambda p: np.zeros((len(p), 3)), u, spaces, operator=op)
    assert np.abs(diag.sigma_coef).max() < 1e-12
    pts = np.array([[0.2, 0.3], [0.6, 0.1]])
    uh = sum(c * f(pts) for c, f in zip(diag.u_coef, spaces.displacement_basis))
    assert np.allclose(uh, u(pts), atol=1e-12)


def test_projection_idempotent(p1m):
    spaces, op = p1m
    prob = manufactured_problem(1)
    first = hdg_project(prob.sigma, prob.u, spaces, operator=op)
    again = reproject(first, spaces, operator=op)
    scale = max(np.abs(first.sigma_coef).max(), np.abs(first.u_coef).max())
    assert np.abs(again.sigma_coef - first.sigma_coef).max() < 1e-12 * scale
    assert np.abs(again.u_coef - first.u_coef).max() < 1e-12 * scale


def test_sbb_members_vanish(p1m):
    _, op = p1m
    assert op.tilde.sbb_residual < 1e-10


def test_projection_needs_m_decomposition():
    with pytest.raises(ConditioningError):
        ProjectionOperator(enriched_stress_basis(TRI, 1, "hdg"), 1.0)


def _sigma_projection_error(level, k=1):
    mesh = build_unit_square_tri_mesh(level)
    prob = manufactured_problem(1)
    coords = mesh.coords
    total = 0.0
    for first in (0, 1):
        el = np.arange(first, mesh.n_elements, 2)
        basis = ElementBasis(coords[el[0]], k)
        op = ProjectionOperator(basis.spaces, 1.0, basis.degree)
        cent = coords[el].mean(axis=1)
        n = len(el)

        def at(points, fn, width):
            return fn((cent[:, None, :] + points[None]).reshape(-1, 2)).reshape(n, len(points), width)

        sv = at(op.rule.points, prob.sigma, 3)
        a, _ = op.apply(
            sv,
            at(op.rule.points, prob.u, 2),
            [at(p, prob.sigma, 3) for p in op.edge_points],
            [at(p, prob.u, 2) for p in op.edge_points],
        )
        d = sv - np.einsum("qcj,ej->eqc", op.phi_s, a)
        total += float(np.einsum("q,c,eqc->", op.rule.weights, FROB, d**2))
    return np.sqrt(total)


def test_projection_converges_at_order_k_plus_one():
    errs = [_sigma_projection_error(lv) for lv in (2, 3, 4)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) < 0.15), orders


def test_stability_constants_golden():
    c = stability_constants(enriched_stress_basis(TRI, 1, "hdg-m"))
    assert c.C_sigma_perp == pytest.approx(1.8113484829835, rel=1e-9)
    assert c.C_v_perp == pytest.approx(0.22754493028111, rel=1e-9)
    assert c.C_eps_v == pytest.approx(2.61312592975, rel=1e-9)
    assert c.C_div_sigma == pytest.approx(3.10754794806, rel=1e-9)
    assert c.a_v_perp == 1.0 and c.alpha_norm == 1.0


@pytest.mark.parametrize("factor", [0.01, 7.0])
def test_stability_constants_scale_invariant(factor):
    a = stability_constants(enriched_stress_basis(TRI, 1, "hdg-m"))
    b = stability_constants(enriched_stress_basis(TRI.scaled(factor), 1, "hdg-m"))
    for name in ("C_sigma_perp", "C_v_perp", "C_eps_v", "C_div_sigma"):
        assert abs(getattr(a, name) - getattr(b, name)) < 1e-10


def test_mixed_space_has_no_v_complement():
    c = stability_constants(enriched_stress_basis(TRI, 2, "mixed-low"))
    assert c.a_v_perp == np.inf
    assert c.alpha_norm == 0.0
    assert c.to_dict()["a_v_perp"] is None
