"""Polynomial bases for scalars, vectors, symmetric tensors, edges and rigid motions."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre

from .fields import ScalarField, TensorField, VectorField, constant, monomial


def p_exponents(k):
    """Exponents ``(i, j)`` with ``i + j <= k``, ordered by total degree."""
    return [(d - j, j) for d in range(k + 1) for j in range(d + 1)]


def q_exponents(k):
    """Exponents ``(i, j)`` with ``max(i, j) <= k``, ordered by total degree."""
    return sorted(((i, j) for i in range(k + 1) for j in range(k + 1)), key=lambda e: (e[0] + e[1], e[1]))


def scalar_basis(exponents, center=(0.0, 0.0), scale=1.0):
    return [monomial(i, j, center, scale) for i, j in exponents]


def vector_basis(scalars):
    zero = constant(0.0)
    out = [VectorField((s, zero), label=f"({s.label},0)") for s in scalars]
    out += [VectorField((zero, s), label=f"(0,{s.label})") for s in scalars]
    return out


def symmetric_tensor_basis(scalars):
    zero = constant(0.0)
    out = []
    for comp in range(3):
        for s in scalars:
            parts = [zero, zero, zero]
            parts[comp] = s
            out.append(TensorField.from_components(*parts, label=f"{('xx', 'xy', 'yy')[comp]}:{s.label}"))
    return out


def rigid_motions():
    one = constant(1.0)
    zero = constant(0.0)
    x = ScalarField(lambda X, Y, p: X, label="x")
    y = ScalarField(lambda X, Y, p: -Y, label="-y")
    return [
        VectorField((one, zero), label="(1,0)"),
        VectorField((zero, one), label="(0,1)"),
        VectorField((y, x), label="(-y,x)"),
    ]


def polynomial_bases(k, center=(0.0, 0.0), scale=1.0, family="P"):
    """Bases of ``P_k`` (or ``Q_k``) scalars, vectors and symmetric tensors.

    Monomials are taken in ``((x, y) - center) / scale``.  The returned dict
    also holds the per-edge trace dimension and the rigid motions.
    """
    exps = p_exponents(k) if family == "P" else q_exponents(k)
    scalars = scalar_basis(exps, center, scale)
    return {
        "scalar": scalars,
        "vector": vector_basis(scalars),
        "tensor": symmetric_tensor_basis(scalars),
        "edge_dim": 2 * (k + 1),
        "rm": rigid_motions(),
    }


def legendre_on_edge(n_max, s, length=1.0):
    """Orthonormal Legendre polynomials on an edge of ``length``.

    ``s`` in [0, 1] is the arc parameter; returns shape (len(s), n_max + 1).
    """
    s = np.asarray(s, dtype=float)
    vals = legendre.legvander(2.0 * s - 1.0, n_max)
    return vals * np.sqrt((2 * np.arange(n_max + 1) + 1) / length)
