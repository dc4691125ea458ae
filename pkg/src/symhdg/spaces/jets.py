"""Truncated bivariate Taylor arithmetic (hyper-dual numbers of arbitrary order).

A :class:`Jet` carries the Taylor coefficients ``f^(i,j) / (i! j!)`` of a
function of ``(x, y)`` at a batch of points, truncated at total degree
``order``.  Arithmetic propagates them exactly, so an order-2 jet yields the
value, gradient and Hessian of any composition of the supported primitives,
and an order-3 jet additionally yields the third derivatives needed for the
divergence of Airy stress fields.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _layout(order):
    idx = [(i, d - i) for d in range(order + 1) for i in range(d, -1, -1)]
    pos = {m: n for n, m in enumerate(idx)}
    pairs = []
    for a, (ia, ja) in enumerate(idx):
        for b, (ib, jb) in enumerate(idx):
            if ia + ib + ja + jb <= order:
                pairs.append((a, b, pos[(ia + ib, ja + jb)]))
    pairs = np.array(pairs, dtype=int)
    return tuple(idx), pos, pairs


class Jet:
    """Truncated Taylor expansion in two variables at a batch of points.

    ``coef`` has shape ``(ncoef, *batch)``.
    """

    __array_priority__ = 1000

    def __init__(self, coef, order):
        self.coef = coef
        self.order = order

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order, shape=None):
        value = np.asarray(value, dtype=float)
        if shape is not None:
            value = np.broadcast_to(value, shape)
        idx, _, _ = _layout(order)
        coef = np.zeros((len(idx),) + value.shape)
        coef[0] = value
        return cls(coef, order)

    @classmethod
    def variables(cls, points, order):
        """Return the coordinate jets ``(X, Y)`` seeded at ``points`` (N, 2)."""
        points = np.asarray(points, dtype=float)
        X = cls.constant(points[..., 0], order)
        Y = cls.constant(points[..., 1], order)
        if order >= 1:
            _, pos, _ = _layout(order)
            X.coef[pos[(1, 0)]] = 1.0
            Y.coef[pos[(0, 1)]] = 1.0
        return X, Y

    def _lift(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other
        return Jet.constant(other, self.order, self.coef.shape[1:])

    # access -----------------------------------------------------------
    def c(self, i, j):
        _, pos, _ = _layout(self.order)
        return self.coef[pos[(i, j)]]

    def derivative(self, i, j):
        """Partial derivative d^(i+j) f / dx^i dy^j."""
        return self.c(i, j) * (math.factorial(i) * math.factorial(j))

    @property
    def value(self):
        return self.coef[0]

    def gradient(self):
        return np.stack([self.derivative(1, 0), self.derivative(0, 1)], axis=-1)

    def hessian(self):
        fxx = self.derivative(2, 0)
        fxy = self.derivative(1, 1)
        fyy = self.derivative(0, 2)
        return np.stack([np.stack([fxx, fxy], -1), np.stack([fxy, fyy], -1)], -2)

    def diff(self, axis):
        """Jet of the partial derivative along ``axis``; order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        idx, _, _ = _layout(self.order - 1)
        coef = np.empty((len(idx),) + self.coef.shape[1:])
        for n, (i, j) in enumerate(idx):
            if axis == 0:
                coef[n] = (i + 1) * self.c(i + 1, j)
            else:
                coef[n] = (j + 1) * self.c(i, j + 1)
        return Jet(coef, self.order - 1)

    # batch handling -------------------------------------------------
    def take(self, index):
        """Restrict to a subset of the batch."""
        return Jet(self.coef[:, index], self.order)

    def scatter(self, index, shape):
        """Embed into a zero jet of batch ``shape`` at positions ``index``."""
        coef = np.zeros((self.coef.shape[0],) + tuple(shape))
        coef[:, index] = self.coef
        return Jet(coef, self.order)

    # arithmetic -------------------------------------------------------
    def __neg__(self):
        return Jet(-self.coef, self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            coef = self.coef.copy()
            coef[0] = coef[0] + other
            return Jet(coef, self.order)
        return Jet(self.coef + self._lift(other).coef, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coef * other, self.order)
        other = self._lift(other)
        _, _, pairs = _layout(self.order)
        coef = np.zeros(np.broadcast_shapes(self.coef.shape, other.coef.shape))
        prod = self.coef[pairs[:, 0]] * other.coef[pairs[:, 1]]
        np.add.at(coef, pairs[:, 2], prod)
        return Jet(coef, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coef / other, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)) and n >= 0:
            result = Jet.constant(1.0, self.order, self.coef.shape[1:])
            base = self
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        return self._series(lambda a, m: _falling(n, m) * a ** (n - m))

    def _series(self, derivs):
        """Compose with a scalar function given ``derivs(a0, m) = f^(m)(a0)``."""
        a0 = self.coef[0]
        delta = Jet(self.coef.copy(), self.order)
        delta.coef[0] = 0.0
        out = Jet.constant(derivs(a0, 0), self.order, self.coef.shape[1:])
        power = Jet.constant(1.0, self.order, self.coef.shape[1:])
        for m in range(1, self.order + 1):
            power = power * delta
            out = out + power * (derivs(a0, m) / math.factorial(m))
        return out

    def reciprocal(self):
        return self._series(lambda a, m: (-1) ** m * math.factorial(m) / a ** (m + 1))

    def exp(self):
        return self._series(lambda a, m: np.exp(a))

    def sin(self):
        return self._series(lambda a, m: np.sin(a + m * np.pi / 2))

    def cos(self):
        return self._series(lambda a, m: np.cos(a + m * np.pi / 2))

    def sqrt(self):
        return self ** 0.5


def _falling(n, m):
    out = 1.0
    for r in range(m):
        out *= n - r
    return out


def exp(a):
    return a.exp() if isinstance(a, Jet) else np.exp(a)


def sin(a):
    return a.sin() if isinstance(a, Jet) else np.sin(a)


def cos(a):
    return a.cos() if isinstance(a, Jet) else np.cos(a)
