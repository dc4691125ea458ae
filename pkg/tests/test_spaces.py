from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symhdg.errors import DomainError, UnsupportedError
from symhdg.geometry import reference_triangle, regular_polygon, unit_square
from symhdg.spaces import (
    Jet,
    ScalarField,
    TensorField,
    airy,
    enriched_stress_basis,
    eval_with_derivatives,
    lam_field,
    legendre_on_edge,
    lifting_xi,
    polynomial_bases,
    rigid_motions,
    triangle_bubble,
)
from symhdg.spaces.fields import monomial
from symhdg.spaces.jets import exp, sin
from symhdg.spaces.sampling import sample_tensors, tensor_gram

TRI = reference_triangle()
CENTROID = np.array([1 / 3, 1 / 3])


def _interior_points(rng, n, poly=TRI, margin=0.02):
    """Random points inside a polygon, away from its boundary."""
    out = []
    while len(out) < n:
        p = rng.uniform(poly.vertices.min(0), poly.vertices.max(0))
        lam = poly.lam_values(p[None])[0]
        if lam.min() > margin:
            out.append(p)
    return np.array(out)


def _fd_gradient(f, p, h=1e-5):
    g = np.zeros(2)
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        g[a] = (-f(p + 2 * e) + 8 * f(p + e) - 8 * f(p - e) + f(p - 2 * e)) / (12 * h)
    return g


# jets -----------------------------------------------------------------


def test_jet_monomial_example():
    f = ScalarField(lambda X, Y, p: X**3 * Y)
    v, g, H = eval_with_derivatives(f, np.array([1.0, 1.0]))
    assert v == 1.0
    assert np.array_equal(g, [3.0, 1.0])
    assert np.array_equal(H, [[6.0, 3.0], [3.0, 0.0]])


@given(
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
    st.floats(0.2, 2.0),
)
def test_jet_derivatives_match_finite_differences(x, y, c):
    def f(X, Y):
        return exp(sin(X * c) * Y) / (X * X + 1.5) + (Y - X) ** 3

    p = np.array([[x, y]])
    X, Y = Jet.variables(p, 2)
    jet = f(X, Y)
    scalar = lambda q: float(f(*Jet.variables(q[None], 0)).value[0])  # noqa: E731
    assert np.allclose(jet.gradient()[0], _fd_gradient(scalar, p[0]), atol=1e-8)
    hess = jet.hessian()[0]
    assert abs(hess[0, 1] - hess[1, 0]) == 0.0
    h = 1e-4
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        col = (_fd_gradient(scalar, p[0] + e, 1e-3) - _fd_gradient(scalar, p[0] - e, 1e-3)) / (2 * h)
        assert np.allclose(hess[:, a], col, atol=1e-5)


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_jet_product_rule(c):
    p = np.array([[0.3, -0.2], [0.7, 0.1]])
    X, Y = Jet.variables(p, 2)
    f = X * c[0] + Y * Y * c[1] + c[2]
    g = X * X * Y * c[3] + c[4] * Y + c[5]
    fg = f * g
    for i, j in ((1, 0), (0, 1)):
        expect = f.derivative(i, j) * g.value + f.value * g.derivative(i, j)
        assert np.allclose(fg.derivative(i, j), expect, atol=1e-12)
    expect = (
        f.derivative(1, 1) * g.value
        + f.derivative(1, 0) * g.derivative(0, 1)
        + f.derivative(0, 1) * g.derivative(1, 0)
        + f.value * g.derivative(1, 1)
    )
    assert np.allclose(fg.derivative(1, 1), expect, atol=1e-12)


# polynomial bases -------------------------------------------------------


@pytest.mark.parametrize("k", range(0, 5))
def test_polynomial_dimensions(k):
    b = polynomial_bases(k)
    assert len(b["scalar"]) == (k + 1) * (k + 2) // 2
    assert len(b["vector"]) == (k + 1) * (k + 2)
    assert len(b["tensor"]) == 3 * (k + 1) * (k + 2) // 2
    assert b["edge_dim"] == 2 * (k + 1)
    assert len(b["rm"]) == 3


def test_polynomial_tensor_examples():
    assert len(polynomial_bases(1)["tensor"]) == 9
    assert len(polynomial_bases(1)["vector"]) == 6
    assert len(polynomial_bases(2)["tensor"]) == 18


def test_rigid_motions_have_zero_strain(rng):
    pts = rng.uniform(-1, 1, (10, 2))
    for r in rigid_motions():
        _, eps = r.evaluate(pts)
        assert np.abs(eps).max() == 0.0


@given(st.integers(0, 6), st.floats(0.1, 3.0))
def test_legendre_orthonormal(n, length):
    from symhdg.geometry import edge_quadrature

    rule = edge_quadrature(2 * n + 2)
    P = legendre_on_edge(n, rule.points, length)
    gram = P.T @ (P * (rule.weights * length)[:, None])
    assert np.allclose(gram, np.eye(n + 1), atol=1e-13)


# Airy operator ----------------------------------------------------------


def test_airy_examples():
    pts = np.array([[0.2, 0.3], [-1.0, 2.0]])
    x2 = airy(ScalarField(lambda X, Y, p: X * X))(pts)
    xy = airy(ScalarField(lambda X, Y, p: X * Y))(pts)
    assert np.allclose(x2, [[0.0, 0.0, 2.0]] * 2)
    assert np.allclose(xy, [[0.0, -1.0, 0.0]] * 2)


def test_airy_bubble_divergence_free_finite_difference(rng):
    field = airy(triangle_bubble(1, TRI))
    h = 1e-4

    def d(p, axis, comp):
        e = np.zeros(2)
        e[axis] = h
        c = lambda q: field(q[None])[0, comp]  # noqa: E731
        return (-c(p + 2 * e) + 8 * c(p + e) - 8 * c(p - e) + c(p - 2 * e)) / (12 * h)

    # the rational bubble has large third derivatives near the vertices
    for p in _interior_points(rng, 20, margin=0.1):
        div = np.hypot(d(p, 0, 0) + d(p, 1, 1), d(p, 0, 1) + d(p, 1, 2))
        assert div < 1e-9


@pytest.mark.parametrize("shape", [TRI, unit_square(), regular_polygon(5)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_airy_enrichments_divergence_free(shape, k):
    variant = "hdg-m"
    spaces = enriched_stress_basis(shape, k, variant)
    rule = shape.volume_rule(2 * k + 8)
    vals, divs = sample_tensors(spaces.enrichment, rule)
    scale = np.abs(vals).max(axis=(1, 2))
    assert np.all(np.abs(divs).max(axis=(1, 2)) <= 1e-8 * np.maximum(scale, 1.0))


# bubbles and liftings ----------------------------------------------------


def test_bubble_centroid_value():
    B2 = triangle_bubble(1, TRI)
    assert B2(CENTROID[None])[0] == pytest.approx(1 / 108, rel=1e-14)


@pytest.mark.parametrize("i", range(3))
def test_bubble_conditions(i):
    B = triangle_bubble(i, TRI)
    for e in range(3):
        pts, _, _ = TRI.edge_rule(e, 19)
        assert len(pts) == 10
        v, g, _ = eval_with_derivatives(B, pts)
        assert np.abs(v).max() < 1e-13
        dn = g @ TRI.normals[e]
        if e != i:
            assert np.abs(dn).max() < 1e-10
        else:
            lam = TRI.lam_values(pts)
            others = [j for j in range(3) if j != i]
            # inward derivative equals lam_{i-1} lam_{i+1} scaled by |grad lam_i|
            slope = np.linalg.norm(TRI.lam[i, :2])
            assert np.abs(-dn - slope * lam[:, others[0]] * lam[:, others[1]]).max() < 1e-10


def test_bubble_gradient_finite_difference():
    B2 = triangle_bubble(1, TRI)
    _, g, _ = eval_with_derivatives(B2, CENTROID)
    fd = _fd_gradient(lambda q: B2(q[None])[0], CENTROID, 1e-3)
    assert np.allclose(g, fd, atol=1e-7)


def test_bubble_rejects_vertices():
    with pytest.raises(DomainError):
        triangle_bubble(0, TRI)(np.array([[0.0, 0.0]]))


def test_rational_hessians_symmetric(rng):
    pts = _interior_points(rng, 30)
    worst = 0.0
    for i in range(3):
        field = triangle_bubble(i, TRI) * lam_field(TRI, i + 1)
        _, _, H = eval_with_derivatives(field, pts)
        worst = max(worst, np.abs(H - np.swapaxes(H, -1, -2)).max())
    assert worst < 1e-13


def test_triangle_lifting_is_edge_function(rng):
    pts = _interior_points(rng, 10)
    for i in range(3):
        xi = lifting_xi(i, TRI)
        assert np.allclose(xi(pts), lam_field(TRI, i + 1)(pts), atol=1e-15)
        assert np.allclose(xi(TRI.vertices), np.eye(3)[i], atol=1e-15)


def test_square_lifting():
    sq = unit_square()
    xi4 = lifting_xi(3, sq)
    assert np.allclose(xi4(sq.vertices), [0, 0, 0, 1], atol=1e-15)
    assert xi4(sq.center[None])[0] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("poly", [unit_square(), regular_polygon(5)])
def test_lifting_normal_derivative_constant_on_edges(poly):
    for i in range(poly.ne):
        xi = lifting_xi(i, poly)
        for e in range(poly.ne):
            pts, _, _ = poly.edge_rule(e, 19)
            _, g, _ = eval_with_derivatives(xi, pts, poly.edge_piece(e))
            dn = g @ poly.normals[e]
            assert np.var(dn) < 1e-12


# element spaces ------------------------------------------------------------


@pytest.mark.parametrize("k, count", [(1, 2), (2, 3), (3, 3), (4, 3)])
def test_triangle_enrichment_count(k, count):
    spaces = enriched_stress_basis(TRI, k, "hdg-m")
    assert len(spaces.enrichment) == count
    assert spaces.trace_dim == 2 * (k + 1)
    assert all(f.tag == "enrichment" for f in spaces.enrichment)
    assert len(spaces.polynomial_stress) == 3 * (k + 1) * (k + 2) // 2


def test_square_exponential_count():
    spaces = enriched_stress_basis(unit_square(), 2, "q-exponential")
    assert len(spaces.enrichment) == 9


def test_exponential_needs_k_two():
    with pytest.raises(UnsupportedError):
        enriched_stress_basis(unit_square(), 1, "q-exponential")


def test_unknown_variant():
    with pytest.raises(UnsupportedError):
        enriched_stress_basis(TRI, 1, "nonsense")


@pytest.mark.parametrize("variant, k", [("hdg-m", 1), ("hdg-m", 3), ("hdg-m-alt", 2), ("mixed", 2)])
def test_stress_basis_independent(variant, k):
    spaces = enriched_stress_basis(TRI, k, variant)
    rule = TRI.volume_rule(max(2 * k + 8, 14))
    vals, _ = sample_tensors(spaces.stress_basis, rule)
    G = tensor_gram(vals, rule.weights)
    d = 1 / np.sqrt(np.diag(G))
    s = np.linalg.svd(G * d[:, None] * d[None], compute_uv=False)
    assert s[-1] > 1e-8


def test_monomials_are_centred_and_scaled():
    m = monomial(2, 1, center=(1.0, 2.0), scale=2.0)
    assert m(np.array([[3.0, 4.0]]))[0] == pytest.approx(1.0)


def test_tensor_combine():
    a = TensorField.from_components(1.0, 0.0, 0.0)
    b = TensorField.from_components(0.0, 1.0, 0.0)
    c = TensorField.combine([2.0, -1.0], [a, b])
    assert np.allclose(c(np.zeros((1, 2))), [[2.0, -1.0, 0.0]])
