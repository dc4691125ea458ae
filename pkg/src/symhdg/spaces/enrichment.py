"""Edge functions, lifting functions, rational bubbles and fill spaces.

Public functions take 0-based edge and vertex indices.  The fill-space
builders follow the 1-based numbering used in the usual statement of the
constructions (edge ``e_i`` joins ``v_i`` and ``v_{i+1}``), converting
internally.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstructionError, UnsupportedError
from ..geometry.polygon import Polygon
from .bases import legendre_on_edge
from .fields import ScalarField, TensorField, X_FIELD, Y_FIELD, constant, guard_vertices, linear, normal_trace


def lam_field(poly, i):
    """The edge function vanishing on edge ``i`` with maximum 1 on the polygon."""
    a, b, c = poly.lam[i % poly.ne]
    return linear(a, b, c, label=f"lam{i % poly.ne + 1}")


def _rational_bubble_fn(lam, i, vertices):
    """``prod_k lam_k * prod_{j != i} lam_j / (lam_j + lam_i)`` on jets."""
    lam = np.asarray(lam)

    def fn(X, Y):
        guard_vertices(X, Y, vertices)
        L = [X * a + Y * b + c for a, b, c in lam]
        out = L[0]
        for m in L[1:]:
            out = out * m
        for j, m in enumerate(L):
            if j != i:
                out = out * m / (m + L[i])
        return out

    return fn


def rational_bubble(i, poly):
    """Rational bubble of edge ``i`` built from all edge functions of ``poly``.

    On a triangle this is the classical rational edge bubble; on a
    parallelogram it is the product form with four edge functions.
    """
    if poly.ne not in (3, 4):
        raise ConstructionError("the product-form bubble needs a triangle or quadrilateral")
    fn = _rational_bubble_fn(poly.lam, i % poly.ne, poly.vertices)
    return ScalarField(lambda X, Y, p: fn(X, Y), label=f"B{i % poly.ne + 1}")


def composite_bubble(i, poly):
    """Bubble of edge ``i`` supported on the star subtriangle containing it."""
    ne = poly.ne
    t = (i + 1) % ne
    tri = Polygon(poly.subtriangles[t])
    # edge i of the polygon is local edge 1 of (center, v_i, v_{i+1})
    fn = _rational_bubble_fn(tri.lam, 1, tri.vertices)

    def field(X, Y, piece):
        idx = np.flatnonzero(piece == t)
        shape = X.coef.shape[1:]
        if idx.size == 0:
            return X * 0.0
        return fn(X.take(idx), Y.take(idx)).scatter(idx, shape)

    return ScalarField(field, polygon=poly, label=f"B{i % ne + 1}")


def triangle_bubble(i, poly, kind="auto"):
    """Edge bubble satisfying the trace conditions (H) on ``poly``.

    ``kind`` is ``"rational"`` (triangles and parallelograms), ``"composite"``
    (star-shaped polygons) or ``"auto"``, which picks the rational form on
    triangles and the composite form otherwise.
    """
    if kind == "auto":
        kind = "rational" if poly.ne == 3 else "composite"
    if kind == "rational":
        return rational_bubble(i, poly)
    if kind == "composite":
        if poly.ne == 3:
            return rational_bubble(i, poly)
        return composite_bubble(i, poly)
    raise ValueError(f"unknown bubble kind {kind!r}")


def lifting_xi(i, poly):
    """Vertex lifting: 1 at vertex ``i``, 0 at the other vertices.

    On a triangle this is the edge function of the edge opposite vertex ``i``;
    otherwise the continuous piecewise-linear function on the star
    subtriangles that also vanishes at the center.
    """
    ne = poly.ne
    i %= ne
    if ne == 3:
        f = lam_field(poly, i + 1)
        f.label = f"xi{i + 1}"
        return f
    coef = np.empty((ne, 3))
    for t, tri in enumerate(poly.subtriangles):
        vals = np.array([0.0, float((t - 1) % ne == i), float(t == i)])
        A = np.column_stack([tri, np.ones(3)])
        coef[t] = np.linalg.solve(A, vals)

    def field(X, Y, piece):
        c = coef[piece]
        return X * c[:, 0] + Y * c[:, 1] + c[:, 2]

    return ScalarField(field, polygon=poly, label=f"xi{i + 1}")


# ----------------------------------------------------------------------
# fill spaces
# ----------------------------------------------------------------------


def _tag(fields, fill):
    for f in fields:
        f.fill = fill
    return fields


def _airy_list(items, fill="fillM"):
    out = []
    for phi, group in items:
        out.append(TensorField.airy(phi, group=group))
    return _tag(out, fill)


def fill_m_polygon(poly, k, bubble="auto"):
    """Fill space for ``P_k(K;S) x P_k(K)`` on a polygon, grouped by edge.

    Each member's ``group`` is the 1-based edge index ``i`` of the set it
    belongs to.
    """
    if k < 1:
        raise UnsupportedError("fill spaces need k >= 1")
    ne = poly.ne

    def L(i):
        return lam_field(poly, i - 1)

    def XI(i):
        return lifting_xi(i - 1, poly)

    def B(i):
        return triangle_bubble(i - 1, poly, bubble)

    items = []
    for i in range(2, ne + 1):
        xi2 = XI(i + 1) ** 2
        if i <= ne - 1:
            for b in range(max(k + 5 - 2 * i, 0), k + 1):
                items.append((xi2 * L(i + 1) ** b, i))
            for b in range(max(k + 4 - 2 * i, 0), k):
                items.append((xi2 * L(i) * L(i + 1) ** b, i))
            items.append((B(i), i))
        elif k == 1:
            items.append((B(i), i))
        else:
            for b in range(max(k + 5 - 2 * i, 0), k - 1):
                items.append((xi2 * L(i + 1) ** (2 + b), i))
            for b in range(max(k + 4 - 2 * i, 0), k - 2):
                items.append((xi2 * L(i) * L(i + 1) ** (2 + b), i))
            items.append((B(i), i))
            items.append((B(i) * L(i + 1), i))
    return _airy_list(items)


def fill_m_triangle_alternative(poly, k):
    """The rotation-symmetric triangle fill ``J{B1 lam2, B2 lam3, B3 lam1}``."""
    if poly.ne != 3:
        raise UnsupportedError("alternative fill is defined on triangles")
    if k < 2:
        raise UnsupportedError("alternative triangle fill needs k >= 2")
    items = [(triangle_bubble(i, poly) * lam_field(poly, i + 1), None) for i in range(3)]
    return _airy_list(items)


def _square_xy():
    x, y = X_FIELD, Y_FIELD
    return x, y, 1.0 - x, 1.0 - y


def _square_bubbles(poly, k):
    B = [rational_bubble(i, poly) for i in range(4)]
    x = X_FIELD
    return [B[1], B[2], B[3], B[3] * x]


def _check_unit_square(poly):
    expected = np.array([[0.0, 1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    if poly.ne != 4 or not np.allclose(poly.vertices, expected, atol=1e-14):
        raise UnsupportedError("this construction is stated on the unit square with v1 = (0, 1)")


def fill_m_square_q_rational(poly, k):
    """Fill for ``Q_k(K;S) x Q_k(K)`` on the unit square with a composite lifting."""
    _check_unit_square(poly)
    x, y, ox, oy = _square_xy()
    xi4 = lifting_xi(3, poly) ** 2
    B = [rational_bubble(i, poly) for i in range(4)]
    if k == 1:
        phis = [B[1], B[2], B[3], xi4, xi4 * ox, xi4 * oy]
    elif k == 2:
        phis = [B[1], B[2], B[3], B[3] * x, xi4 * ox, xi4 * oy, xi4 * ox * oy, xi4 * ox**2, xi4 * oy**2]
    else:
        phis = [
            B[1], B[2], B[3], B[3] * x,
            xi4 * ox ** (k - 1), xi4 * oy ** (k - 1),
            xi4 * ox ** (k - 1) * oy, xi4 * ox * oy ** (k - 1),
            xi4 * ox**k, xi4 * oy**k,
        ]
    return _airy_list([(p, None) for p in phis])


def _exp_terms(k):
    x, y, ox, oy = _square_xy()
    ex = (1.0 - y).exp()
    ey = (1.0 - x).exp()
    return (x * ex * y) ** 2 * ox**k, (ey * x * y) ** 2 * oy**k


def fill_m_square_q_exponential(poly, k):
    """Fill for ``Q_k(K;S) x Q_k(K)`` on the unit square using exponentials."""
    _check_unit_square(poly)
    if k < 2:
        raise UnsupportedError("the exponential square fill needs k >= 2")
    x, y, ox, oy = _square_xy()
    xy2 = (x * y) ** 2
    B = _square_bubbles(poly, k)
    e1, e2 = _exp_terms(k)
    if k == 2:
        poly_terms = [xy2 * ox, xy2 * oy, xy2 * ox * oy]
    else:
        poly_terms = [xy2 * ox ** (k - 1), xy2 * oy ** (k - 1), xy2 * ox ** (k - 1) * oy, xy2 * ox * oy ** (k - 1)]
    return _airy_list([(p, None) for p in B + poly_terms + [e1, e2]])


def fill_m_square_p_exponential(poly, k):
    """Fill for ``P_k(K;S) x P_k(K)`` on the unit square using exponentials."""
    _check_unit_square(poly)
    if k < 2:
        raise UnsupportedError("the exponential square fill needs k >= 2")
    x, y, ox, oy = _square_xy()
    xy2 = (x * y) ** 2
    B = _square_bubbles(poly, k)
    e1, e2 = _exp_terms(k)
    if k == 2:
        poly_terms = [xy2 * ox, xy2 * oy, xy2 * ox * oy]
    elif k == 3:
        poly_terms = [xy2 * ox**2, xy2 * ox * oy, xy2 * oy**2, xy2 * ox**2 * oy, xy2 * ox * oy**2]
    else:
        poly_terms = [
            xy2 * ox ** (k - 1), xy2 * ox ** (k - 2) * oy,
            xy2 * oy ** (k - 1), xy2 * ox * oy ** (k - 2),
            xy2 * ox ** (k - 1) * oy, xy2 * ox * oy ** (k - 1),
        ]
    return _airy_list([(p, None) for p in B + poly_terms + [e1, e2]])


def fill_v_square(k):
    """Divergence fill for ``Q_k(K;S) x Q_k(K)`` on the unit square."""
    x, y = X_FIELD, Y_FIELD
    zero = constant(0.0)
    fields = [
        TensorField.from_components(x ** (k + 1) * y ** (k - 1), zero, zero, tag="enrichment", label="xx:x^(k+1)y^(k-1)"),
        TensorField.from_components(x ** (k + 1) * y**k, zero, zero, tag="enrichment", label="xx:x^(k+1)y^k"),
        TensorField.from_components(zero, zero, x**k * y ** (k + 1), tag="enrichment", label="yy:x^k y^(k+1)"),
    ]
    return _tag(fields, "fillV")


def _edge_highorder_residual(field, poly, k, nq):
    """Non-``P_k`` part of the normal trace on every edge, stacked."""
    out = []
    for e in range(poly.ne):
        pts, w, s = poly.edge_rule(e, nq)
        vals, _ = field.evaluate(pts, poly.edge_piece(e))
        tn = normal_trace(vals, poly.normals[e])
        P = legendre_on_edge(k, s, poly.edge_lengths[e])
        sw = np.sqrt(w)[:, None]
        coef = P.T @ (w[:, None] * tn)
        res = (tn - P @ coef) * sw
        out.append(res.ravel())
    return np.concatenate(out)


def fill_v_polygon(poly, k, bubble="auto", tol=1e-10):
    """Divergence fill for ``P_k(K;S) x P_k(K)`` on a polygon, ``k >= 2``.

    Each member is a monomial tensor of degree ``k+1`` plus Airy corrections
    built from ``xi_{i+1}^2 lam_{i+1}^{k+1}`` and ``xi_{i+1}^2 lam_i lam_{i+1}^k``
    whose coefficients are fitted by least squares so the normal trace lies
    in ``P_k`` on every edge.
    """
    if k < 2:
        raise UnsupportedError("the polygon divergence fill needs k >= 2")
    ne = poly.ne
    cx, cy = poly.center
    x = X_FIELD - cx
    y = Y_FIELD - cy
    zero = constant(0.0)
    corrections = []
    for i in range(1, ne + 1):
        xi2 = lifting_xi(i % ne, poly) ** 2
        li = lam_field(poly, i - 1)
        lj = lam_field(poly, i)
        corrections.append(TensorField.airy(xi2 * lj ** (k + 1)))
        corrections.append(TensorField.airy(xi2 * li * lj**k))
    nq = 2 * k + 8
    R = np.column_stack([_edge_highorder_residual(c, poly, k, nq) for c in corrections])
    out = []
    for comp in (0, 2):
        for a in range(k + 1):
            if comp == 0:
                base = TensorField.from_components(x ** (k + 1 - a) * y**a, zero, zero, label=f"xx:x^{k + 1 - a}y^{a}")
            else:
                # the yy member uses x^a y^(k+1-a) so that the divergences span
                # every homogeneous degree-k monomial
                base = TensorField.from_components(zero, zero, x**a * y ** (k + 1 - a), label=f"yy:x^{a}y^{k + 1 - a}")
            r0 = _edge_highorder_residual(base, poly, k, nq)
            coef, *_ = np.linalg.lstsq(R, -r0, rcond=None)
            resid = np.linalg.norm(r0 + R @ coef) / max(np.linalg.norm(r0), 1.0)
            if resid > tol:
                raise ConstructionError(f"trace fitting residual {resid:.2e} exceeds {tol:.0e}")
            f = TensorField.combine([1.0, *coef], [base, *corrections], tag="enrichment", label=f"phi{1 + comp // 2}_{a}")
            f.fit_residual = resid
            out.append(f)
    return _tag(out, "fillV")
