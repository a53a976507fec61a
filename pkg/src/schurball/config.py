"""Tolerance and budget settings threaded through every operation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class Tolerances:
    """Numerical policy for one run.

    tol       residual tolerance for operator identities and verdicts
    rank_tol  relative singular-value cutoff for rank decisions
    order     Taylor truncation order for coefficient-based computations
    samples   generation budget for span closures and point batteries
    """

    tol: float = 1e-8
    rank_tol: float = 1e-9
    order: int = 8
    samples: int = 40

    def __post_init__(self):
        if self.tol <= 0 or self.rank_tol <= 0:
            raise InputError("tolerances must be positive")
        if self.order < 1:
            raise InputError("order must be >= 1")
        if self.samples < 1:
            raise InputError("samples must be >= 1")


DEFAULT = Tolerances()
