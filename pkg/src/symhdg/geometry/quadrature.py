"""Quadrature rules on the reference triangle, on edges and on polygons."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from ..errors import CapacityError, GeometryError, QuadratureError

MAX_TRIANGLE_DEGREE = 30


@dataclass(frozen=True)
class QuadratureRule:
    """Points, positive weights and the polynomial degree integrated exactly.

    ``pieces`` optionally labels each point with the polygon subtriangle it
    belongs to, so piecewise fields can be evaluated without point location.
    """

    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    pieces: np.ndarray | None = None

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))


def _freeze(*arrays):
    for a in arrays:
        if a is not None:
            a.setflags(write=False)


def _monomial_check_triangle(points, weights, degree):
    x, y = points[:, 0], points[:, 1]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            got = weights @ (x**a * y**b)
            if abs(got - exact) > 1e-12 * max(exact, 1e-300) + 1e-15:
                raise QuadratureError(
                    f"rule of degree {degree} fails on x^{a} y^{b}: {got} vs {exact}"
                )


@lru_cache(maxsize=None)
def triangle_quadrature(degree):
    """Symmetric interior rule on the reference triangle (0,0), (1,0), (0,1).

    The Xiao-Gimbutas family shipped with basix is used; every rule has
    positive weights and strictly interior points.
    """
    import basix

    degree = int(degree)
    if not 1 <= degree <= MAX_TRIANGLE_DEGREE:
        raise CapacityError(f"triangle quadrature degree must be in [1, {MAX_TRIANGLE_DEGREE}]")
    pts, wts = basix.make_quadrature(
        basix.CellType.triangle, degree, rule=basix.QuadratureType.xiao_gimbutas
    )
    pts = np.ascontiguousarray(pts, dtype=float)
    wts = np.ascontiguousarray(wts, dtype=float)
    if np.any(wts <= 0) or np.any(pts <= 0) or np.any(pts.sum(axis=1) >= 1):
        raise QuadratureError("basix rule is not positive and interior")
    _monomial_check_triangle(pts, wts, degree)
    _freeze(pts, wts)
    return QuadratureRule(pts, wts, degree)


@lru_cache(maxsize=None)
def edge_quadrature(degree):
    """Gauss-Legendre rule on [0, 1] exact for polynomials of ``degree``."""
    degree = int(degree)
    if degree < 0:
        raise CapacityError("edge quadrature degree must be nonnegative")
    n = degree // 2 + 1
    s, w = roots_legendre(n)
    pts = 0.5 * (s + 1.0)
    wts = 0.5 * w
    _freeze(pts, wts)
    return QuadratureRule(pts, wts, 2 * n - 1)


@lru_cache(maxsize=None)
def _duffy_square(degree):
    """Collapsed rule on the unit square, weight s for the collapse at s = 0."""
    ns = degree // 2 + 2
    nt = degree // 2 + 1
    s, ws = roots_jacobi(ns, 0.0, 1.0)  # weight (1+s) on [-1, 1]
    s = 0.5 * (s + 1.0)
    ws = ws / 4.0
    t, wt = roots_legendre(nt)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    return S.ravel(), T.ravel(), W.ravel()


def _collapsed_rule(p0, p1, p2, degree):
    """Duffy rule on triangle (p0, p1, p2) collapsed at ``p0``."""
    s, t, w = _duffy_square(degree)
    d1 = p1 - p0
    d2 = p2 - p0
    pts = p0 + s[:, None] * ((1 - t)[:, None] * d1 + t[:, None] * d2)
    jac = abs(d1[0] * d2[1] - d1[1] * d2[0])
    return pts, w * jac


@lru_cache(maxsize=None)
def _graded_reference(degree):
    """Vertex-graded rule on the reference triangle.

    The triangle is split into six pieces around the centroid, each owning one
    original vertex, and each piece gets a Duffy rule collapsed at that vertex.
    Fields that are smooth except for a direction-dependent limit at the
    vertices (Airy fields of rational bubbles) become smooth in the collapsed
    coordinates, so the rule converges spectrally for them while remaining
    exact for polynomials of the requested degree.
    """
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    g = v.mean(axis=0)
    pts, wts = [], []
    for i in range(3):
        a, b = v[(i + 1) % 3], v[(i + 2) % 3]
        for m in ((v[i] + a) / 2, (v[i] + b) / 2):
            p, w = _collapsed_rule(v[i], m, g, degree)
            pts.append(p)
            wts.append(w)
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    _monomial_check_triangle(pts, wts, degree)
    _freeze(pts, wts)
    return pts, wts


def graded_triangle_quadrature(degree):
    """Vertex-graded composite rule on the reference triangle (see above)."""
    degree = int(degree)
    if not 1 <= degree <= 60:
        raise CapacityError("graded quadrature degree must be in [1, 60]")
    pts, wts = _graded_reference(degree)
    return QuadratureRule(pts, wts, degree)


def physical_map(element, ref_point):
    """Affine map of reference coordinates onto the triangle ``element``.

    Returns the mapped point(s) and the constant Jacobian matrix.
    """
    element = np.asarray(element, dtype=float)
    jac = np.column_stack([element[1] - element[0], element[2] - element[0]])
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    scale = max(1.0, float(np.abs(jac).max()))
    if abs(det) <= 1e-14 * scale * scale:
        raise GeometryError("degenerate element")
    ref_point = np.asarray(ref_point, dtype=float)
    return element[0] + ref_point @ jac.T, jac


def triangle_rule_on(vertices, degree, graded=False):
    """Points and weights of a reference rule mapped to a physical triangle."""
    rule = graded_triangle_quadrature(degree) if graded else triangle_quadrature(degree)
    pts, jac = physical_map(vertices, rule.points)
    return pts, rule.weights * abs(np.linalg.det(jac))
