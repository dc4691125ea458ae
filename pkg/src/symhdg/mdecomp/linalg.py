"""Rank-revealing helpers with recorded singular-value gaps."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import AmbiguousRankError

RANK_TOL = 1e-8
MIN_GAP = 10.0


@dataclass
class RankCertificate:
    """Outcome of one rank decision."""

    what: str
    rank: int
    size: int
    tol: float
    smallest_kept: float | None
    largest_dropped: float | None
    gap: float

    def to_dict(self):
        d = asdict(self)
        if not np.isfinite(d["gap"]):
            d["gap"] = None
        return d


def rank_decision(singular_values, tol=RANK_TOL, what="rank", ncols=None):
    """Count singular values above ``tol * max`` and certify the gap."""
    s = np.sort(np.asarray(singular_values, dtype=float))[::-1]
    n = len(s) if ncols is None else ncols
    if s.size == 0 or s[0] == 0.0:
        return 0, RankCertificate(what, 0, n, tol, None, None, float("inf"))
    keep = s > tol * s[0]
    r = int(keep.sum())
    kept = float(s[r - 1]) if r > 0 else None
    dropped = float(s[r]) if r < len(s) else None
    if dropped is None or dropped == 0.0:
        gap = float("inf")
    else:
        gap = kept / dropped
    cert = RankCertificate(what, r, n, tol, kept, dropped, gap)
    if gap < MIN_GAP:
        raise AmbiguousRankError(f"{what}: singular value gap {gap:.2f} below {MIN_GAP}", s)
    return r, cert


def rank(matrix, tol=RANK_TOL, what="rank"):
    matrix = np.atleast_2d(matrix)
    if matrix.size == 0:
        return 0, RankCertificate(what, 0, matrix.shape[1], tol, None, None, float("inf"))
    s = np.linalg.svd(matrix, compute_uv=False)
    # a tall matrix has at most ncols singular values; pad with zeros for wide ones
    if len(s) < matrix.shape[1]:
        s = np.concatenate([s, np.zeros(matrix.shape[1] - len(s))])
    return rank_decision(s, tol, what, matrix.shape[1])


def nullspace(matrix, tol=RANK_TOL, what="nullspace"):
    """Orthonormal basis (columns) of the kernel of ``matrix``."""
    matrix = np.atleast_2d(matrix)
    n = matrix.shape[1]
    if matrix.shape[0] == 0:
        return np.eye(n), RankCertificate(what, 0, n, tol, None, None, float("inf"))
    _, s, vt = np.linalg.svd(matrix, full_matrices=matrix.shape[0] < n)
    s_full = np.concatenate([s, np.zeros(max(0, n - len(s)))])
    r, cert = rank_decision(s_full, tol, what, n)
    return vt[r:].T, cert


def column_basis(matrix, tol=RANK_TOL, what="range"):
    """Orthonormal basis of the column space of ``matrix``."""
    matrix = np.atleast_2d(matrix)
    if matrix.shape[1] == 0:
        return np.zeros((matrix.shape[0], 0)), RankCertificate(what, 0, 0, tol, None, None, float("inf"))
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    r, cert = rank_decision(s, tol, what, matrix.shape[1])
    return u[:, :r], cert


def projection_residual(target, basis, tol=RANK_TOL):
    """Relative residual of projecting the columns of ``target`` on ``span(basis)``."""
    target = np.atleast_2d(target)
    if target.size == 0:
        return 0.0
    norms = np.linalg.norm(target, axis=0)
    if basis.shape[1] == 0:
        return 1.0 if np.any(norms > 0) else 0.0
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    q = u[:, s > tol * s[0]] if s.size and s[0] > 0 else u[:, :0]
    res = target - q @ (q.T @ target)
    if norms.max() == 0:
        return 0.0
    norms = np.maximum(norms, 1e-6 * norms.max())
    return float(np.max(np.linalg.norm(res, axis=0) / norms))
