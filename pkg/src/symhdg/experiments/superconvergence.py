"""Distance between the HDG projection of the exact solution and ``u_h``."""

from __future__ import annotations

import numpy as np

from ..mdecomp.projection import ProjectionOperator
from ..spaces.sampling import sample_vectors, vector_gram


def projection_error(fields, problem, chunk=2048):
    """``||Pi_V u - u_h||`` over the mesh, with ``Pi`` the HDG projection.

    One projection operator is built per shape class and applied to batches
    of elements.
    """
    mesh = fields.mesh
    alpha = fields.classes[0].local.M[0, 0]
    total = 0.0
    for cls in fields.classes:
        basis = cls.basis
        op = ProjectionOperator(basis.spaces, alpha, basis.degree)
        vals, _ = sample_vectors(basis.spaces.displacement_basis, basis.rule)
        gram = vector_gram(vals, basis.rule.weights)
        el = cls.elements
        cent = mesh.coords[el].mean(axis=1)
        for s in range(0, len(el), chunk):
            c = cent[s : s + chunk]
            n = len(c)

            def at(points, fn, width):
                pts = (c[:, None, :] + points[None]).reshape(-1, 2)
                return fn(pts).reshape(n, len(points), width)

            sv = at(op.rule.points, problem.sigma, 3)
            uv = at(op.rule.points, problem.u, 2)
            se = [at(p, problem.sigma, 3) for p in op.edge_points]
            ue = [at(p, problem.u, 2) for p in op.edge_points]
            a, b = op.apply(sv, uv, se, ue)
            _, u_pi = op.to_basis(a, b)
            u_h = fields.u[el[s : s + chunk]] @ basis.Rinv_v.T
            d = u_pi - u_h
            total += float(np.einsum("ei,ij,ej->", d, gram, d))
    return float(np.sqrt(total))
