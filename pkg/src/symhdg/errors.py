"""Exception hierarchy shared by all subpackages."""


class SymHDGError(Exception):
    """Base class for every error raised by this package."""


class CapacityError(SymHDGError):
    """A request exceeds a resource guard or a supported range."""


class GeometryError(SymHDGError):
    """Degenerate or otherwise invalid geometry."""


class OrientationError(GeometryError):
    """A triangle is not counter-clockwise."""


class ConformityError(GeometryError):
    """A triangulation is not conforming (hanging nodes, over-shared edges)."""


class MeshParseError(SymHDGError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(SymHDGError):
    """A field was evaluated outside its smoothness domain."""


class ConstructionError(SymHDGError):
    """A basis or lifting function could not be constructed."""


class UnsupportedError(SymHDGError):
    """A space variant is not defined for the requested degree or shape."""


class AmbiguousRankError(SymHDGError):
    """Singular values do not separate cleanly into zero and nonzero groups."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class QuadratureError(SymHDGError):
    """Two quadrature levels disagree beyond the allowed tolerance."""


class ConditioningError(SymHDGError):
    """A local matrix is singular or too badly conditioned to factor."""


class SolverError(SymHDGError):
    """The global linear solve failed to converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class MaterialError(SymHDGError):
    """Invalid material parameters."""
