"""Meshes, reference polygons and quadrature."""

from .mesh import DIAGONAL, MAX_LEVEL, TriMesh, build_unit_square_tri_mesh, import_mesh, mesh_to_text
from .polygon import Polygon, reference_triangle, regular_polygon, unit_square
from .quadrature import (
    QuadratureRule,
    edge_quadrature,
    graded_triangle_quadrature,
    physical_map,
    triangle_quadrature,
    triangle_rule_on,
)

__all__ = [
    "DIAGONAL",
    "MAX_LEVEL",
    "Polygon",
    "QuadratureRule",
    "TriMesh",
    "build_unit_square_tri_mesh",
    "edge_quadrature",
    "graded_triangle_quadrature",
    "import_mesh",
    "mesh_to_text",
    "physical_map",
    "reference_triangle",
    "regular_polygon",
    "triangle_quadrature",
    "triangle_rule_on",
    "unit_square",
]
