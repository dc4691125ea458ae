"""Conforming triangle meshes of the unit square and a small text format."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import (
    CapacityError,
    ConformityError,
    GeometryError,
    MeshParseError,
    OrientationError,
)

MAX_LEVEL = 12
DIAGONAL = "lower-left to upper-right"


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangulation with an explicit edge table.

    Local edge ``j`` of triangle ``t`` joins ``triangles[t, j]`` and
    ``triangles[t, (j+1) % 3]``; the global direction of an edge is from its
    lower vertex id to its higher one and ``element_edge_signs`` records
    whether the local direction agrees (+1) or not (-1).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    element_edges: np.ndarray
    element_edge_signs: np.ndarray
    boundary_flags: np.ndarray
    level: int | None = None

    @property
    def n_elements(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def h(self):
        if self.level is not None:
            return 2.0 ** (-self.level)
        return float(self.diameters.max())

    def element_vertices(self, t):
        return self.vertices[self.triangles[t]]

    @property
    def coords(self):
        """Array (n_elements, 3, 2) of element vertex coordinates."""
        return self.vertices[self.triangles]

    @property
    def areas(self):
        c = self.coords
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def diameters(self):
        c = self.coords
        lens = np.linalg.norm(c - np.roll(c, -1, axis=1), axis=2)
        return lens.max(axis=1)

    def outward_normals(self):
        """Outward unit normals, shape (n_elements, 3, 2)."""
        c = self.coords
        d = np.roll(c, -1, axis=1) - c
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def edge_lengths(self):
        return np.linalg.norm(self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]], axis=1)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _build(vertices, triangles, level=None):
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    nt = len(triangles)
    local = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=-1).reshape(-1, 2)
    lo = local.min(axis=1)
    hi = local.max(axis=1)
    keys = lo * len(vertices) + hi
    uniq, first, inverse, counts = np.unique(keys, return_index=True, return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        raise ConformityError("an edge is shared by more than two triangles")
    # number edges in order of first appearance for a stable, readable layout
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    edges = np.column_stack([lo[first[order]], hi[first[order]]])
    element_edges = rank[inverse].reshape(nt, 3)
    signs = np.where(local[:, 0] < local[:, 1], 1, -1).reshape(nt, 3)
    boundary = (counts == 1)[order]
    _freeze(vertices, triangles, edges, element_edges, signs, boundary)
    return TriMesh(vertices, triangles, edges, element_edges, signs, boundary, level)


def build_unit_square_tri_mesh(level):
    """Uniform mesh of (0,1)^2 with 2*4**level triangles.

    Every grid cell is split along its lower-left to upper-right diagonal.
    """
    level = int(level)
    if level < 0:
        raise CapacityError("level must be nonnegative")
    if level > MAX_LEVEL:
        raise CapacityError(f"level {level} exceeds the guard {MAX_LEVEL}")
    n = 2**level
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    j, i = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (j * (n + 1) + i).ravel()
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    return _build(vertices, tris, level)


def _parse(lines: Iterable[str]):
    verts, tris = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) != 3:
                raise MeshParseError("expected 'v x y'", lineno)
            try:
                verts.append((float(parts[1]), float(parts[2])))
            except ValueError:
                raise MeshParseError("bad vertex coordinate", lineno) from None
        elif tag == "t":
            if len(parts) != 4:
                raise MeshParseError("expected 't i j k'", lineno)
            try:
                idx = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise MeshParseError("bad vertex index", lineno) from None
            if min(idx) < 0 or len(set(idx)) != 3:
                raise MeshParseError("invalid vertex indices", lineno)
            tris.append((idx, lineno))
        else:
            raise MeshParseError(f"unknown record '{tag}'", lineno)
    return verts, tris


def import_mesh(text):
    """Read a mesh from text (or a file-like object) and validate it."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    verts, tris = _parse(lines)
    if not verts or not tris:
        raise MeshParseError("mesh needs at least one vertex and one triangle")
    V = np.array(verts, dtype=float)
    for idx, lineno in tris:
        if max(idx) >= len(V):
            raise MeshParseError("vertex index out of range", lineno)
        p = V[list(idx)]
        area = 0.5 * ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0]))
        scale = np.abs(p).max() + 1.0
        if abs(area) <= 1e-14 * scale * scale:
            raise GeometryError(f"line {lineno}: degenerate triangle")
        if area < 0:
            raise OrientationError(f"line {lineno}: triangle is clockwise")
    mesh = _build(V, [t for t, _ in tris])
    _check_hanging_nodes(mesh)
    return mesh


def _check_hanging_nodes(mesh, tol=1e-12):
    V = mesh.vertices
    for e in np.flatnonzero(mesh.boundary_flags):
        a, b = V[mesh.edges[e]]
        d = b - a
        L2 = d @ d
        rel = V - a
        s = rel @ d / L2
        dist = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / np.sqrt(L2)
        inside = (s > tol) & (s < 1 - tol) & (dist < tol * np.sqrt(L2))
        if np.any(inside):
            raise ConformityError(f"hanging node on edge {tuple(mesh.edges[e])}")


def mesh_to_text(mesh):
    out = [f"v {float(x)!r} {float(y)!r}" for x, y in mesh.vertices]
    out += [f"t {i} {j} {k}" for i, j, k in mesh.triangles]
    return "\n".join(out) + "\n"
