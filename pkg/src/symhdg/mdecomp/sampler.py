"""Weighted sample matrices of local bases.

All subspace questions are answered in the span of weighted samples:
a volume field ``f`` becomes the column ``sqrt(w) f(x_q)`` so that Euclidean
inner products of columns are the quadrature L2 inner products.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..spaces.bases import legendre_on_edge
from ..spaces.fields import FROB
from ..spaces.sampling import sample_edge_traces, sample_tensors, sample_vectors


def _cols(arr, weights, comp_weights=None):
    """(nf, nq, c) samples -> (nq*c, nf) weighted matrix."""
    w = np.sqrt(weights)[None, :, None]
    if comp_weights is not None:
        w = w * np.sqrt(comp_weights)[None, None, :]
    return (arr * w).reshape(arr.shape[0], -1).T


class TensorSamples:
    """Volume, divergence and per-edge trace samples of tensor fields."""

    def __init__(self, fields, poly, k, degree):
        self.fields = list(fields)
        self.poly = poly
        self.k = k
        rule = poly.volume_rule(degree, graded=True)
        self.rule = rule
        vals, divs = sample_tensors(self.fields, rule)
        self.vol = _cols(vals, rule.weights, FROB)
        self.div = _cols(divs, rule.weights)
        self.edge = []
        self.edge_coef = []
        self.edge_res = []
        for e in range(poly.ne):
            tr, w, s = sample_edge_traces(self.fields, poly, e, degree, "tensor")
            self.edge.append(_cols(tr, w))
            c, r = _legendre_fit(tr, w, s, k, poly.edge_lengths[e])
            self.edge_coef.append(c)
            self.edge_res.append(r)

    @property
    def n(self):
        return len(self.fields)

    def trace(self, edges=None):
        edges = range(self.poly.ne) if edges is None else edges
        if not len(edges):
            return np.zeros((0, self.n))
        return np.vstack([self.edge[e] for e in edges])


class VectorSamples:
    """Volume, symmetric-gradient and per-edge trace samples of vector fields."""

    def __init__(self, fields, poly, k, degree):
        self.fields = list(fields)
        self.poly = poly
        rule = poly.volume_rule(degree, graded=True)
        self.rule = rule
        vals, eps = sample_vectors(self.fields, rule)
        self.vol = _cols(vals, rule.weights)
        self.eps = _cols(eps, rule.weights, FROB)
        self.edge = []
        self.edge_coef = []
        self.edge_res = []
        for e in range(poly.ne):
            tr, w, s = sample_edge_traces(self.fields, poly, e, degree, "vector")
            self.edge.append(_cols(tr, w))
            c, r = _legendre_fit(tr, w, s, k, poly.edge_lengths[e])
            self.edge_coef.append(c)
            self.edge_res.append(r)

    @property
    def n(self):
        return len(self.fields)

    def trace(self, edges=None):
        edges = range(self.poly.ne) if edges is None else edges
        return np.vstack([self.edge[e] for e in edges])


def _legendre_fit(tr, w, s, k, length):
    """Legendre coefficients (nf, k+1, 2) and relative residual per field."""
    P = legendre_on_edge(k, s, length)
    coef = np.einsum("qn,q,fqc->fnc", P, w, tr)
    res = tr - np.einsum("qn,fnc->fqc", P, coef)
    res_norm = np.sqrt(np.einsum("q,fqc->f", w, res**2))
    tot = np.sqrt(np.einsum("q,fqc->f", w, tr**2))
    return coef, (res_norm, tot)


def membership_residual(samples):
    """Largest relative non-``P_k`` part of the traces over all fields.

    Each field's residual is measured against its total trace norm on the
    boundary, so fields vanishing on some edges are handled uniformly.
    """
    res = np.sqrt(sum(r**2 for r, _ in samples.edge_res))
    tot = np.sqrt(sum(t**2 for _, t in samples.edge_res))
    if tot.size == 0:
        return 0.0
    scale = np.maximum(tot, 1e-6 * max(tot.max(), 1e-300))
    return float(np.max(res / scale))


class LocalSampler:
    """Sample matrices for the stress and displacement bases of ``spaces``."""

    def __init__(self, spaces, degree=None):
        self.spaces = spaces
        self.poly = spaces.polygon
        self.k = spaces.k
        self.degree = degree or (2 * spaces.k + 8)

    @cached_property
    def sigma(self):
        return TensorSamples(self.spaces.stress_basis, self.poly, self.spaces.trace_degree, self.degree)

    @cached_property
    def v(self):
        return VectorSamples(self.spaces.displacement_basis, self.poly, self.spaces.trace_degree, self.degree)

    def tensors(self, fields):
        return TensorSamples(fields, self.poly, self.spaces.trace_degree, self.degree)

    @property
    def dim_m(self):
        return self.poly.ne * self.spaces.trace_dim
