"""Result record shared by the models and the sweep engine."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CorrelationResult:
    """Correlation at one grid point.

    stderr is 0 for deterministic models; n_samples counts the Monte Carlo
    draws actually used (1 for deterministic evaluations); n_degenerate the
    draws excluded by the degeneracy guard.
    """

    t_M: float
    t_I: float
    C: float
    stderr: float
    n_samples: int
    n_degenerate: int = 0

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")
        if abs(self.C) > 1 + 1e-9:
            raise ValueError(f"|C| = {abs(self.C)!r} exceeds 1")
