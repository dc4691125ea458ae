"""Scalar, vector and symmetric-tensor fields evaluated through Taylor jets.

Every field is a closure ``fn(X, Y, piece)`` acting on coordinate jets, so
values and derivatives of any order come from the same code path.  Fields
built from composite (piecewise) functions carry the polygon whose star
subtriangles define their pieces; ``piece`` is then an integer array that
selects the subtriangle of every point.

Symmetric tensors are stored by components ``(xx, xy, yy)``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .jets import Jet

# Frobenius weights for (xx, xy, yy) storage
FROB = np.array([1.0, 2.0, 1.0])


def _as_jet(value, X):
    if isinstance(value, Jet):
        return value
    return Jet.constant(value, X.order, X.coef.shape[1:])


def _merge_polygon(a, b):
    pa = getattr(a, "polygon", None)
    pb = getattr(b, "polygon", None)
    if pa is not None and pb is not None and pa is not pb:
        raise ValueError("cannot combine piecewise fields on different polygons")
    return pa if pa is not None else pb


def resolve_pieces(polygon, points, piece):
    if polygon is None:
        return None
    if piece is None:
        return polygon.locate(points)
    return np.broadcast_to(np.asarray(piece), (len(points),))


class ScalarField:
    """Scalar function of ``(x, y)`` with jet evaluation."""

    def __init__(self, fn, polygon=None, label=""):
        self.fn = fn
        self.polygon = polygon
        self.label = label

    @property
    def piecewise(self):
        return self.polygon is not None

    def jet(self, points, order, piece=None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        piece = resolve_pieces(self.polygon, points, piece)
        X, Y = Jet.variables(points, order)
        return _as_jet(self.fn(X, Y, piece), X)

    def __call__(self, points, piece=None):
        return self.jet(points, 0, piece).value

    # algebra ----------------------------------------------------------
    def _binary(self, other, op, symbol):
        if isinstance(other, ScalarField):
            f, g = self.fn, other.fn
            return ScalarField(
                lambda X, Y, p: op(f(X, Y, p), g(X, Y, p)),
                _merge_polygon(self, other),
                f"({self.label}{symbol}{other.label})",
            )
        f = self.fn
        return ScalarField(lambda X, Y, p: op(f(X, Y, p), other), self.polygon, f"({self.label}{symbol}{other})")

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    def __rmul__(self, other):
        return self * other

    def __neg__(self):
        f = self.fn
        return ScalarField(lambda X, Y, p: -f(X, Y, p), self.polygon, f"-{self.label}")

    def __pow__(self, n):
        f = self.fn
        if n == 0:
            return ScalarField(lambda X, Y, p: 1.0, self.polygon, "1")
        return ScalarField(lambda X, Y, p: f(X, Y, p) ** n, self.polygon, f"{self.label}^{n}")

    def exp(self):
        f = self.fn
        return ScalarField(lambda X, Y, p: _as_jet(f(X, Y, p), X).exp(), self.polygon, f"exp({self.label})")

    def __repr__(self):
        return f"ScalarField({self.label})"


def constant(c, label=None):
    return ScalarField(lambda X, Y, p: c, label=label or repr(c))


def linear(a, b, c, label=""):
    """The affine field ``a x + b y + c``."""
    return ScalarField(lambda X, Y, p: X * a + Y * b + c, label=label)


def monomial(i, j, center=(0.0, 0.0), scale=1.0):
    cx, cy = center
    return ScalarField(
        lambda X, Y, p: ((X - cx) * (1.0 / scale)) ** i * ((Y - cy) * (1.0 / scale)) ** j,
        label=f"x^{i}y^{j}",
    )


X_FIELD = ScalarField(lambda X, Y, p: X, label="x")
Y_FIELD = ScalarField(lambda X, Y, p: Y, label="y")


class VectorField:
    """A 2-vector field given by two scalar fields."""

    def __init__(self, components, label=""):
        self.components = tuple(components)
        self.label = label

    @property
    def polygon(self):
        return _merge_polygon(*self.components)

    def jets(self, points, order, piece=None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        piece = resolve_pieces(self.polygon, points, piece)
        return [c.jet(points, order, piece) for c in self.components]

    def __call__(self, points, piece=None):
        return np.stack([j.value for j in self.jets(points, 0, piece)], axis=-1)

    def evaluate(self, points, piece=None):
        """Values (N, 2) and symmetric gradients (N, 3) in (xx, xy, yy)."""
        u, v = self.jets(points, 1, piece)
        eps = np.stack([u.derivative(1, 0), 0.5 * (u.derivative(0, 1) + v.derivative(1, 0)), v.derivative(0, 1)], -1)
        return np.stack([u.value, v.value], -1), eps

    def __repr__(self):
        return f"VectorField({self.label})"


class TensorField:
    """Symmetric 2x2 tensor field.

    ``comps(points, order, piece)`` returns the three component jets of the
    requested order.  ``tag`` is ``"polynomial"`` or ``"enrichment"`` and
    ``group`` optionally records the edge a fill member is attached to.
    """

    def __init__(self, comps, polygon=None, tag="polynomial", label="", group=None, potential=None):
        self._comps = comps
        self.polygon = polygon
        self.tag = tag
        self.label = label
        self.group = group
        self.potential = potential

    @classmethod
    def from_components(cls, xx, xy, yy, tag="polynomial", label=""):
        fields = [f if isinstance(f, ScalarField) else constant(f) for f in (xx, xy, yy)]
        polygon = _merge_polygon(_merge_polygon(fields[0], fields[1]), fields[2])

        def comps(points, order, piece):
            return [f.jet(points, order, piece) for f in fields]

        return cls(comps, polygon, tag, label)

    @classmethod
    def airy(cls, phi, tag="enrichment", label=None, group=None):
        """The Airy stress field ``J phi = [[phi_yy, -phi_xy], [-phi_xy, phi_xx]]``."""

        def comps(points, order, piece):
            j = phi.jet(points, order + 2, piece)
            jx = j.diff(0)
            jy = j.diff(1)
            return [jy.diff(1), -(jx.diff(1)), jx.diff(0)]

        return cls(comps, phi.polygon, tag, label or f"J({phi.label})", group, potential=phi)

    @classmethod
    def combine(cls, coeffs, fields, tag=None, label=""):
        """Linear combination ``sum c_i F_i`` of tensor fields."""
        coeffs = [float(c) for c in coeffs]
        fields = list(fields)
        polygon = None
        for f in fields:
            polygon = _merge_polygon(polygon, f) if polygon is not None else f.polygon

        def comps(points, order, piece):
            out = None
            for c, f in zip(coeffs, fields):
                if c == 0.0:
                    continue
                js = f.comps(points, order, piece)
                js = [j * c for j in js]
                out = js if out is None else [a + b for a, b in zip(out, js)]
            if out is None:
                return [Jet.constant(0.0, order, (len(points),)) for _ in range(3)]
            return out

        tag = tag or ("enrichment" if any(f.tag == "enrichment" for f in fields) else "polynomial")
        return cls(comps, polygon, tag, label)

    def comps(self, points, order, piece=None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        piece = resolve_pieces(self.polygon, points, piece)
        return self._comps(points, order, piece)

    def __call__(self, points, piece=None):
        return np.stack([j.value for j in self.comps(points, 0, piece)], axis=-1)

    def evaluate(self, points, piece=None):
        """Values (N, 3) and divergence (N, 2)."""
        xx, xy, yy = self.comps(points, 1, piece)
        div = np.stack(
            [xx.derivative(1, 0) + xy.derivative(0, 1), xy.derivative(1, 0) + yy.derivative(0, 1)], -1
        )
        return np.stack([xx.value, xy.value, yy.value], -1), div

    def matrix(self, points, piece=None):
        v = self(points, piece)
        return np.stack([np.stack([v[..., 0], v[..., 1]], -1), np.stack([v[..., 1], v[..., 2]], -1)], -2)

    def __repr__(self):
        return f"TensorField({self.label}, {self.tag})"


def airy(phi, **kwargs):
    return TensorField.airy(phi, **kwargs)


def normal_trace(values, normal):
    """``tau n`` for tensor values (N, 3) and a unit normal."""
    nx, ny = normal
    return np.stack([values[..., 0] * nx + values[..., 1] * ny, values[..., 1] * nx + values[..., 2] * ny], -1)


def eval_with_derivatives(field, point, piece=None):
    """Value, gradient and Hessian of a scalar field at ``point``.

    For vector or tensor fields the results are stacked over components.
    """
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    single = np.asarray(point).ndim == 1
    if isinstance(field, ScalarField):
        jets = [field.jet(pts, 2, piece)]
    elif isinstance(field, VectorField):
        jets = field.jets(pts, 2, piece)
    else:
        jets = field.comps(pts, 2, piece)
    vals = np.stack([j.value for j in jets], 0)
    grads = np.stack([j.gradient() for j in jets], 0)
    hess = np.stack([j.hessian() for j in jets], 0)
    if isinstance(field, ScalarField):
        vals, grads, hess = vals[0], grads[0], hess[0]
    if single:
        vals, grads, hess = vals[..., 0], grads[..., 0, :], hess[..., 0, :, :]
    return vals, grads, hess


def guard_vertices(X, Y, vertices, tol=1e-12):
    """Reject evaluation points within ``tol`` of any vertex."""
    x = X.value
    y = Y.value
    for vx, vy in vertices:
        if np.any(np.hypot(x - vx, y - vy) < tol):
            raise DomainError("rational field evaluated at a vertex")
