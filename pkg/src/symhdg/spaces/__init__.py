"""Local finite element spaces, Airy fields and enrichment functions."""

from .bases import legendre_on_edge, polynomial_bases, rigid_motions
from .element import VARIANTS, ElementSpaces, enriched_stress_basis
from .enrichment import (
    composite_bubble,
    fill_m_polygon,
    fill_m_square_p_exponential,
    fill_m_square_q_exponential,
    fill_m_square_q_rational,
    fill_m_triangle_alternative,
    fill_v_polygon,
    fill_v_square,
    lam_field,
    lifting_xi,
    rational_bubble,
    triangle_bubble,
)
from .fields import ScalarField, TensorField, VectorField, airy, eval_with_derivatives
from .jets import Jet

__all__ = [
    "VARIANTS",
    "ElementSpaces",
    "Jet",
    "ScalarField",
    "TensorField",
    "VectorField",
    "airy",
    "composite_bubble",
    "enriched_stress_basis",
    "eval_with_derivatives",
    "fill_m_polygon",
    "fill_m_square_p_exponential",
    "fill_m_square_q_exponential",
    "fill_m_square_q_rational",
    "fill_m_triangle_alternative",
    "fill_v_polygon",
    "fill_v_square",
    "lam_field",
    "legendre_on_edge",
    "lifting_xi",
    "polynomial_bases",
    "rational_bubble",
    "rigid_motions",
    "triangle_bubble",
]
