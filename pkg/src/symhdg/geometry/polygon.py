"""Reference polygons: vertices, edge functions, normals and star subdivision.

Indices are 0-based: edge ``i`` runs from vertex ``i`` to vertex ``i+1``
(mod ne), ``lam[i]`` vanishes on edge ``i``, and subtriangle ``t`` is
``(center, v[t-1], v[t])`` so that edge ``i`` lies in subtriangle ``i+1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import ConstructionError, GeometryError
from .quadrature import QuadratureRule, edge_quadrature, triangle_rule_on


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True, eq=False)
class Polygon:
    """A simple counter-clockwise polygon, star-shaped about ``center``."""

    vertices: np.ndarray
    center: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("a polygon needs at least three 2D vertices")
        nxt = np.roll(v, -1, axis=0)
        signed = 0.5 * np.sum(_cross(v, nxt))
        if signed <= 0:
            raise GeometryError("polygon vertices must be counter-clockwise")
        c = self.center
        if c is None:
            cx = np.sum((v[:, 0] + nxt[:, 0]) * _cross(v, nxt)) / (6 * signed)
            cy = np.sum((v[:, 1] + nxt[:, 1]) * _cross(v, nxt)) / (6 * signed)
            c = np.array([cx, cy])
        c = np.array(c, dtype=float)
        v.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "center", c)
        if np.any(self.subtriangle_areas <= 0):
            raise ConstructionError("polygon is not star-shaped about its center")

    @property
    def ne(self):
        return len(self.vertices)

    @cached_property
    def area(self):
        v = self.vertices
        return 0.5 * float(np.sum(_cross(v, np.roll(v, -1, axis=0))))

    @cached_property
    def diameter(self):
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))

    def edge(self, i):
        i %= self.ne
        return self.vertices[i], self.vertices[(i + 1) % self.ne]

    @cached_property
    def edge_lengths(self):
        v = self.vertices
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    @cached_property
    def normals(self):
        """Outward unit normals, one row per edge."""
        v = self.vertices
        d = np.roll(v, -1, axis=0) - v
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def lam(self):
        """Coefficients ``(a, b, c)`` of ``lam_i = a x + b y + c``, max 1 on K."""
        rows = []
        for i in range(self.ne):
            p, _ = self.edge(i)
            n = self.normals[i]
            # vanishes on edge i and increases inward
            a, b = -n
            c = n @ p
            vals = self.vertices @ np.array([a, b]) + c
            s = vals.max()
            rows.append(np.array([a, b, c]) / s)
        out = np.array(rows)
        out.setflags(write=False)
        return out

    def lam_values(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self.lam[:, :2].T + self.lam[:, 2]

    @cached_property
    def subtriangles(self):
        """Vertex arrays of the star subtriangles ``(center, v[t-1], v[t])``."""
        v = self.vertices
        return [np.array([self.center, v[t - 1], v[t]]) for t in range(self.ne)]

    @cached_property
    def subtriangle_areas(self):
        return np.array([0.5 * _cross(t[1] - t[0], t[2] - t[0]) for t in self.subtriangles])

    def locate(self, points, tol=1e-12):
        """Index of the star subtriangle containing each point.

        Points on a shared ray go to the lowest index; points outside raise.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(points), -1)
        for t, tri in enumerate(self.subtriangles):
            bary = self._barycentric(tri, points)
            hit = (out < 0) & np.all(bary >= -tol, axis=1)
            out[hit] = t
        if np.any(out < 0):
            raise GeometryError("point outside polygon")
        return out

    @staticmethod
    def _barycentric(tri, points):
        a, b, c = tri
        det = _cross(b - a, c - a)
        l1 = _cross(b - points, c - points) / det
        l2 = _cross(c - points, a - points) / det
        return np.column_stack([l1, l2, 1 - l1 - l2])

    def volume_rule(self, degree, graded=True):
        """Composite rule over the star subtriangles, labelled by piece.

        Triangles are integrated as a single piece.
        """
        if self.ne == 3:
            pts, wts = triangle_rule_on(self.vertices, degree, graded=graded)
            return QuadratureRule(pts, wts, degree, np.zeros(len(wts), dtype=int))
        pts, wts, pieces = [], [], []
        for t, tri in enumerate(self.subtriangles):
            p, w = triangle_rule_on(tri, degree, graded=graded)
            pts.append(p)
            wts.append(w)
            pieces.append(np.full(len(w), t))
        return QuadratureRule(np.concatenate(pts), np.concatenate(wts), degree, np.concatenate(pieces))

    def edge_piece(self, i):
        """Subtriangle containing edge ``i``."""
        return 0 if self.ne == 3 else (i + 1) % self.ne

    def edge_rule(self, i, degree):
        """Physical points, weights (times length) and parameters on edge ``i``."""
        rule = edge_quadrature(degree)
        p, q = self.edge(i)
        s = rule.points
        pts = p + s[:, None] * (q - p)
        return pts, rule.weights * self.edge_lengths[i], s

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return Polygon(self.vertices + shift, self.center + shift)

    def scaled(self, factor):
        return Polygon(self.vertices * factor, self.center * factor)

    def key(self, digits=12):
        """Hashable shape signature up to translation."""
        rel = np.round(self.vertices - self.vertices.mean(axis=0), digits) + 0.0
        return tuple(map(tuple, rel))


def reference_triangle():
    return Polygon([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def unit_square():
    """Unit square ordered so that ``lam = (x, y, 1-x, 1-y)``."""
    return Polygon([[0.0, 1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], center=[0.5, 0.5])


def regular_polygon(ne, radius=1.0):
    ang = 2 * np.pi * np.arange(ne) / ne - np.pi / 2 + np.pi / ne
    return Polygon(radius * np.column_stack([np.cos(ang), np.sin(ang)]), center=[0.0, 0.0])
