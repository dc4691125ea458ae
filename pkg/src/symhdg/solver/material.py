"""Isotropic linear elastic material in two dimensions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MaterialError


@dataclass(frozen=True)
class MaterialLaw:
    """Young's modulus ``E`` and Poisson ratio ``nu`` with Lame constants.

    Tensors are stored by components ``(xx, xy, yy)`` in the last axis.
    """

    E: float
    nu: float

    def __post_init__(self):
        if not (np.isfinite(self.E) and self.E > 0):
            raise MaterialError("Young's modulus must be positive")
        if not (0.0 < self.nu < 0.5):
            raise MaterialError(f"Poisson ratio must satisfy 0 < nu < 0.5, got {self.nu}")

    @property
    def lam(self):
        return self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))

    @property
    def mu(self):
        return self.E / (2 * (1 + self.nu))

    def apply_compliance(self, sigma):
        """``A sigma = (sigma - lam / (2 mu + 2 lam) tr(sigma) I) / (2 mu)``."""
        sigma = np.asarray(sigma, dtype=float)
        tr = sigma[..., 0] + sigma[..., 2]
        c = self.lam / (2 * self.mu + 2 * self.lam)
        out = sigma / (2 * self.mu)
        out[..., 0] -= c * tr / (2 * self.mu)
        out[..., 2] -= c * tr / (2 * self.mu)
        return out

    def apply_stiffness(self, eps):
        """``C eps = 2 mu eps + lam tr(eps) I``."""
        eps = np.asarray(eps, dtype=float)
        tr = eps[..., 0] + eps[..., 2]
        out = 2 * self.mu * eps
        out[..., 0] += self.lam * tr
        out[..., 2] += self.lam * tr
        return out
