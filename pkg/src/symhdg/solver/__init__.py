"""Local HDG assembly, static condensation, global solve and postprocessing."""

from .assembly import (
    DENSE_LIMIT,
    SolutionFields,
    SolverConfig,
    TraceSystem,
    assemble_and_solve,
    build_trace_system,
    dirichlet_data,
    postprocess_displacement,
    shape_classes,
    solve_trace_system,
)
from .local import (
    ElementBasis,
    LocalSystem,
    PostprocessOperator,
    assemble_local,
    condense,
    default_degree,
    enrichment_degree,
    expand,
    local_blocks,
)
from .material import MaterialLaw

__all__ = [
    "DENSE_LIMIT",
    "ElementBasis",
    "LocalSystem",
    "MaterialLaw",
    "PostprocessOperator",
    "SolutionFields",
    "SolverConfig",
    "TraceSystem",
    "assemble_and_solve",
    "assemble_local",
    "build_trace_system",
    "condense",
    "default_degree",
    "dirichlet_data",
    "enrichment_degree",
    "expand",
    "local_blocks",
    "postprocess_displacement",
    "shape_classes",
    "solve_trace_system",
]
