"""Batch evaluation of bases at quadrature points and Gram utilities."""

from __future__ import annotations

import numpy as np

from ..errors import ConditioningError, QuadratureError
from .fields import FROB, normal_trace


def sample_tensors(fields, rule_or_points, pieces=None):
    """Values (nf, nq, 3) and divergences (nf, nq, 2) of tensor fields."""
    pts, pieces = _points(rule_or_points, pieces)
    vals = np.empty((len(fields), len(pts), 3))
    divs = np.empty((len(fields), len(pts), 2))
    for n, f in enumerate(fields):
        vals[n], divs[n] = f.evaluate(pts, pieces)
    return vals, divs


def sample_vectors(fields, rule_or_points, pieces=None):
    """Values (nf, nq, 2) and symmetric gradients (nf, nq, 3) of vector fields."""
    pts, pieces = _points(rule_or_points, pieces)
    vals = np.empty((len(fields), len(pts), 2))
    eps = np.empty((len(fields), len(pts), 3))
    for n, f in enumerate(fields):
        vals[n], eps[n] = f.evaluate(pts, pieces)
    return vals, eps


def sample_edge_traces(fields, poly, edge, degree, kind="tensor"):
    """Normal traces (tensors) or traces (vectors) on one edge.

    Returns values (nf, nq, 2), weights (including length) and parameters.
    """
    pts, w, s = poly.edge_rule(edge, degree)
    piece = poly.edge_piece(edge)
    if kind == "tensor":
        vals, _ = sample_tensors(fields, pts, piece)
        tr = normal_trace(vals, poly.normals[edge])
    else:
        tr, _ = sample_vectors(fields, pts, piece)
    return tr, w, s


def _points(rule_or_points, pieces):
    if hasattr(rule_or_points, "weights"):
        return rule_or_points.points, rule_or_points.pieces if pieces is None else pieces
    return np.atleast_2d(np.asarray(rule_or_points, dtype=float)), pieces


def tensor_gram(vals, weights):
    return np.einsum("iqc,jqc,q,c->ij", vals, vals, weights, FROB)


def vector_gram(vals, weights):
    return np.einsum("iqc,jqc,q->ij", vals, vals, weights)


def orthonormalizer(gram, cond_bound=1e13, what="basis"):
    """Upper-triangular ``R^{-1}`` with ``R^T R = gram``.

    Columns of ``basis @ R^{-1}`` are orthonormal and keep the basis order,
    so later members are orthogonalized against earlier ones (polynomials
    before enrichments).
    """
    g = 0.5 * (gram + gram.T)
    d = np.sqrt(np.diag(g))
    if np.any(d <= 0):
        raise ConditioningError(f"{what} has a zero member")
    gs = g / np.outer(d, d)
    try:
        L = np.linalg.cholesky(gs)
    except np.linalg.LinAlgError:
        raise ConditioningError(f"{what} Gram matrix is not positive definite") from None
    diag = np.diag(L)
    if diag.min() ** 2 < 1.0 / cond_bound:
        raise ConditioningError(f"{what} is numerically dependent (pivot {diag.min():.1e})")
    Rinv = np.linalg.solve(L.T, np.eye(len(g)))
    return Rinv / d[:, None]


def richardson_check(compute, degree, fine_degree, tol=1e-9, what="integral"):
    """Compare ``compute(degree)`` against ``compute(fine_degree)``."""
    coarse = np.asarray(compute(degree))
    fine = np.asarray(compute(fine_degree))
    scale = max(np.abs(fine).max(), 1e-300)
    err = np.abs(coarse - fine).max() / scale
    if err >= tol:
        raise QuadratureError(f"{what}: degree {degree} vs {fine_degree} differ by {err:.2e}")
    return coarse, err
