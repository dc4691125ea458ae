"""Local stress, displacement and trace spaces on one element."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UnsupportedError
from .bases import polynomial_bases
from .enrichment import (
    fill_m_polygon,
    fill_m_square_p_exponential,
    fill_m_square_q_exponential,
    fill_m_square_q_rational,
    fill_m_triangle_alternative,
    fill_v_polygon,
    fill_v_square,
)

VARIANTS = (
    "hdg",
    "hdg-m",
    "hdg-m-alt",
    "hdg-m-exp",
    "mixed",
    "mixed-low",
    "q",
    "q-rational",
    "q-exponential",
    "q-mixed",
)


@dataclass(frozen=True, eq=False)
class ElementSpaces:
    """``Sigma(K) x V(K) x M(dK)`` for one reference polygon.

    ``stress_basis`` lists polynomial members first, then enrichments.
    ``trace_dim`` is the dimension of ``M(e)`` on every edge.
    """

    polygon: object
    k: int
    variant: str
    stress_basis: list
    displacement_basis: list
    trace_degree: int
    family: str = "P"
    notes: list = field(default_factory=list)

    @property
    def trace_dim(self):
        return 2 * (self.trace_degree + 1)

    @property
    def enrichment(self):
        return [f for f in self.stress_basis if f.tag == "enrichment"]

    @property
    def polynomial_stress(self):
        return [f for f in self.stress_basis if f.tag != "enrichment"]

    def fill(self, kind):
        return [f for f in self.enrichment if getattr(f, "fill", None) == kind]

    @property
    def dims(self):
        return {
            "Sigma": len(self.stress_basis),
            "V": len(self.displacement_basis),
            "M": self.polygon.ne * self.trace_dim,
        }


def enriched_stress_basis(shape, k, variant="hdg-m", bubble="auto"):
    """Build the local spaces of ``variant`` on ``shape``.

    Variants
    --------
    hdg           P_k(K;S) x P_k(K)
    hdg-m         P_k(K;S) + polygon fill  x P_k(K)
    hdg-m-alt     triangle only, rotation-symmetric fill (k >= 2)
    hdg-m-exp     unit square, exponential fill of the P_k family (k >= 2)
    mixed         hdg-m plus the divergence fill, V = P_k (k >= 2)
    mixed-low     P_k(K;S) + polygon fill  x  div P_k(K;S)
    q             Q_k(K;S) x Q_k(K) on the unit square
    q-rational    Q_k plus the composite-lifting fill
    q-exponential Q_k plus the exponential fill (k >= 2)
    q-mixed       q-rational plus the divergence fill
    """
    if variant not in VARIANTS:
        raise UnsupportedError(f"unknown variant {variant!r}")
    if k < 1:
        raise UnsupportedError("k must be at least 1")
    family = "Q" if variant.startswith("q") else "P"
    if family == "Q" and shape.ne != 4:
        raise UnsupportedError("Q_k spaces are defined on the unit square")
    scale = shape.diameter
    base = polynomial_bases(k, center=tuple(shape.center), scale=scale, family=family)
    stress = list(base["tensor"])
    disp = list(base["vector"])
    if variant in ("hdg-m", "mixed", "mixed-low"):
        stress += fill_m_polygon(shape, k, bubble)
    elif variant == "hdg-m-alt":
        stress += fill_m_triangle_alternative(shape, k)
    elif variant == "hdg-m-exp":
        stress += fill_m_square_p_exponential(shape, k)
    elif variant in ("q-rational", "q-mixed"):
        stress += fill_m_square_q_rational(shape, k)
    elif variant == "q-exponential":
        stress += fill_m_square_q_exponential(shape, k)
    if variant == "mixed":
        stress += fill_v_polygon(shape, k, bubble)
    elif variant == "q-mixed":
        stress += fill_v_square(k)
    if variant == "mixed-low":
        # div P_k(K;S) = P_{k-1}(K) vector-valued
        disp = list(polynomial_bases(k - 1, center=tuple(shape.center), scale=scale)["vector"])
    return ElementSpaces(shape, k, variant, stress, disp, k, family)


def enrichment_count(spaces):
    return len(spaces.enrichment)


def stress_gram(spaces, rule):
    """Frobenius Gram matrix of the stress basis under ``rule``."""
    from .sampling import sample_tensors

    vals, _ = sample_tensors(spaces.stress_basis, rule)
    w = rule.weights
    F = np.array([1.0, 2.0, 1.0])
    return np.einsum("iqc,jqc,q,c->ij", vals, vals, w, F)
