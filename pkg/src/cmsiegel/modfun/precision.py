"""Precision settings shared by every numerical kernel."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import mpmath

DEFAULT_BITS = 128
MAX_BITS = 1024
ENV_BITS = "CM_SIEGEL_PRECISION_BITS"


def default_bits() -> int:
    raw = os.environ.get(ENV_BITS)
    if raw is None:
        return DEFAULT_BITS
    bits = int(raw)
    if bits < 53:
        raise ValueError(f"{ENV_BITS} must be >= 53, got {bits}")
    return bits


@dataclass(frozen=True)
class Precision:
    """Absolute error goal plus the working precision used to reach it.

    ``truncation_radius`` forces a lattice-sum box radius when set; by default
    each kernel picks the smallest radius whose tail bound is below target.
    """

    target: float = 1e-25
    pole_threshold: float = 1e-30
    bits: int = field(default_factory=default_bits)
    max_bits: int = MAX_BITS
    truncation_radius: int | None = None

    def __post_init__(self):
        if not self.target > 0:
            raise ValueError("target must be positive")
        if self.bits < 53:
            raise ValueError("bits must be >= 53")

    def doubled(self) -> Precision:
        return replace(self, bits=2 * self.bits)

    def workprec(self):
        return mpmath.workprec(self.bits)

    @property
    def eps(self) -> mpmath.mpf:
        """Unit roundoff at the working precision."""
        return mpmath.ldexp(mpmath.mpf(1), -self.bits + 1)

    def to_json(self) -> dict:
        return {"target": self.target, "pole_threshold": self.pole_threshold,
                "bits": self.bits, "max_bits": self.max_bits,
                "truncation_radius": self.truncation_radius}
