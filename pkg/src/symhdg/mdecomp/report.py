"""Report container for M-decomposition checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class MDecompReport:
    """Dimensions, indices, rank certificates and pass flags.

    ``passes`` maps property names to booleans; ``pass_`` is their conjunction
    (or the index test alone for index-only reports).
    """

    dims: dict = field(default_factory=dict)
    I_M: int | None = None
    I_S: int | None = None
    per_edge: list = field(default_factory=list)
    theta: int | None = None
    certificates: list = field(default_factory=list)
    passes: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def pass_(self):
        return bool(self.passes) and all(self.passes.values())

    def add_cert(self, cert):
        self.certificates.append(cert.to_dict())

    def to_dict(self):
        return {
            "dims": self.dims,
            "I_M": self.I_M,
            "I_S": self.I_S,
            "per_edge": self.per_edge,
            "theta": self.theta,
            "certificates": self.certificates,
            "pass": self.pass_,
            "passes": self.passes,
            "residuals": self.residuals,
            "notes": self.notes,
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)
