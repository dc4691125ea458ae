"""Manufactured elasticity problems on the unit square."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..solver.material import MaterialLaw
from ..spaces.fields import ScalarField, VectorField
from ..spaces.jets import sin

PI = np.pi


@dataclass(frozen=True)
class Problem:
    """Exact displacement with derived stress, load and boundary data.

    ``sigma = 2 mu eps(u) + lam div(u) I`` and ``f = -div sigma`` are obtained
    from second-order jets of ``exact_u``; ``g`` is ``exact_u`` itself.
    """

    id: int | str
    exact_u: VectorField
    material: MaterialLaw
    chunk: int = 200_000

    def _chunks(self, points, fn, width):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((len(points), width))
        for s in range(0, len(points), self.chunk):
            out[s : s + self.chunk] = fn(points[s : s + self.chunk])
        return out

    def u(self, points):
        return self._chunks(points, lambda p: self.exact_u(p), 2)

    def g(self, points):
        return self.u(points)

    def _sigma(self, p):
        _, eps = self.exact_u.evaluate(p)
        return self.material.apply_stiffness(eps)

    def sigma(self, points):
        """Exact stress (N, 3) in (xx, xy, yy)."""
        return self._chunks(points, self._sigma, 3)

    def _f(self, p):
        a, b = self.exact_u.jets(p, 2)
        lam, mu = self.material.lam, self.material.mu
        axx, axy, ayy = a.derivative(2, 0), a.derivative(1, 1), a.derivative(0, 2)
        bxx, bxy, byy = b.derivative(2, 0), b.derivative(1, 1), b.derivative(0, 2)
        # div sigma = mu lap u + (lam + mu) grad div u
        f1 = mu * (axx + ayy) + (lam + mu) * (axx + bxy)
        f2 = mu * (bxx + byy) + (lam + mu) * (axy + byy)
        return -np.stack([f1, f2], axis=-1)

    def f(self, points):
        """Load ``-div sigma`` (N, 2)."""
        return self._chunks(points, self._f, 2)


def _p1_component():
    def fn(X, Y, piece):
        return 10.0 * (Y - Y * Y) * sin(PI * X) * (1.0 - X) * (1.0 - 0.5 * Y)

    return ScalarField(fn, label="u1")


def _p2_u1(swap=False):
    def fn(X, Y, piece):
        if swap:
            X, Y = Y, X
        return -(X * X) * (X - 1.0) ** 2 * Y * (Y - 1.0) * (2.0 * Y - 1.0)

    return ScalarField(fn, label="u1")


def manufactured_problem(id, E=None, nu=None):
    """Problem 1 (``E = 1``, ``nu = 0.3`` by default) or problem 2 (``E = 3``).

    Problem 1: ``u1 = 10 (y - y^2) sin(pi x) (1 - x)(1 - y/2)``, ``u2 = 0``.
    Problem 2: ``u1 = -x^2 (x-1)^2 y (y-1)(2y-1)``, ``u2(x, y) = -u1(y, x)``.
    """
    id = int(id)
    if id == 1:
        material = MaterialLaw(1.0 if E is None else E, 0.3 if nu is None else nu)
        u = VectorField((_p1_component(), ScalarField(lambda X, Y, p: 0.0 * X, label="0")), "problem 1")
    elif id == 2:
        material = MaterialLaw(3.0 if E is None else E, 0.3 if nu is None else nu)
        u = VectorField((_p2_u1(), -_p2_u1(swap=True)), "problem 2")
    else:
        raise DomainError(f"unknown problem id {id}; expected 1 or 2")
    return Problem(id, u, material)


def polynomial_problem(coeffs, material, label="polynomial"):
    """Problem whose displacement is a polynomial vector field.

    ``coeffs`` maps exponents ``(i, j)`` to 2-vectors of coefficients.
    """
    items = [(int(i), int(j), np.asarray(c, dtype=float)) for (i, j), c in coeffs.items()]

    def comp(c):
        def fn(X, Y, piece):
            out = 0.0 * X
            for i, j, v in items:
                if v[c] != 0.0:
                    out = out + v[c] * (X**i) * (Y**j)
            return out

        return ScalarField(fn, label=f"{label}[{c}]")

    return Problem(label, VectorField((comp(0), comp(1)), label), material)
