"""Numerical verification of M-decompositions."""

from .linalg import RANK_TOL, RankCertificate, column_basis, nullspace, rank
from .projection import (
    ProjectionDiagnostic,
    ProjectionOperator,
    StabilityConstants,
    TildeSpaces,
    canonical_tilde_spaces,
    hdg_project,
    reproject,
    stability_constants,
)
from .report import MDecompReport
from .verify import (
    closed_form_edge_index,
    closed_form_index,
    compute_indices,
    ordered_kernels,
    subspace_rank,
    theta_of,
    verify_fill_properties,
    verify_mdecomposition,
)

__all__ = [
    "MDecompReport",
    "ProjectionDiagnostic",
    "ProjectionOperator",
    "RANK_TOL",
    "RankCertificate",
    "StabilityConstants",
    "TildeSpaces",
    "canonical_tilde_spaces",
    "closed_form_edge_index",
    "closed_form_index",
    "column_basis",
    "compute_indices",
    "hdg_project",
    "nullspace",
    "ordered_kernels",
    "rank",
    "reproject",
    "stability_constants",
    "subspace_rank",
    "theta_of",
    "verify_fill_properties",
    "verify_mdecomposition",
]
