"""Element-wise L2 error norms of discrete solutions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..spaces.fields import FROB


@dataclass
class ErrorRecord:
    """L2 errors over the mesh; ``ustar`` is ``None`` without postprocessing."""

    sigma: float
    u: float
    ustar: float | None
    degree: int

    def to_dict(self):
        return dict(self.__dict__)


def l2_errors(fields, problem, mesh=None, degree=None, chunk=1024):
    """Frobenius L2 error of ``sigma_h`` and Euclidean L2 errors of ``u_h``, ``u*_h``.

    The default quadrature degree is the enrichment degree of the local
    bases (at least ``2(k + 2) + 4``) on the vertex-graded rule, independent
    of the solution.
    """
    mesh = mesh or fields.mesh
    k = fields.k
    degree = int(degree or max(fields.classes[0].basis.degree, 2 * (k + 2) + 4))
    es = eu = eus = 0.0
    for cls in fields.classes:
        basis = cls.basis
        rule = basis.error_rule(degree)
        w = rule.weights
        phs = basis.stress_values(rule.points)
        phv = basis.vector_values(rule.points)
        phw = cls.post.values(rule.points) if (fields.ustar is not None and cls.post is not None) else None
        el = cls.elements
        cent = mesh.coords[el].mean(axis=1)
        for s in range(0, len(el), chunk):
            idx = el[s : s + chunk]
            pts = (cent[s : s + chunk, None, :] + rule.points[None]).reshape(-1, 2)
            shape = (len(idx), len(w))
            sig = problem.sigma(pts).reshape(shape + (3,))
            u = problem.u(pts).reshape(shape + (2,))
            dsig = sig - np.einsum("qcj,ej->eqc", phs, fields.sigma[idx])
            du = u - np.einsum("qcj,ej->eqc", phv, fields.u[idx])
            es += float(np.einsum("q,c,eqc->", w, FROB, dsig**2))
            eu += float(np.einsum("q,eqc->", w, du**2))
            if phw is not None:
                dus = u - np.einsum("qj,ecj->eqc", phw, fields.ustar[idx])
                eus += float(np.einsum("q,eqc->", w, dus**2))
    return ErrorRecord(np.sqrt(es), np.sqrt(eu), np.sqrt(eus) if fields.ustar is not None else None, degree)
