"""HDG methods for linear elasticity with strongly symmetric stresses."""

__version__ = "0.1.0"
