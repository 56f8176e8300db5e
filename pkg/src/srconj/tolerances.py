"""Integrator and detector tolerances with library-wide defaults."""

from __future__ import annotations

from dataclasses import dataclass

# zero-of-det(N) location machinery
GRID_POINTS = 2000           # dense-output intervals per horizon
STARTUP_FRACTION = 1e-4      # skip (0, frac*horizon): N starts singular there
DIP_THRESHOLD = 1e-7         # relative smallest-singular-value dip level
SWITCH_THRESHOLD = 1e-6      # smallest eigenvalue of the inverse-phase matrix
BLOWUP_CAP = 1e12            # matrix max-norm declaring a Riccati blow-up
BLOWUP_NORM_FLOOR = 1e8      # step-collapse norm still counted as blow-up
STEP_FLOOR = 1e-14           # relative step-size underflow


@dataclass(frozen=True)
class Tolerances:
    """Relative/absolute integration tolerances and the time-refinement width."""

    rtol: float = 1e-10
    atol: float = 1e-12
    refine: float = 1e-9

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.refine <= 0:
            raise ValueError("tolerances must be positive")

    def tighter(self, factor: float = 10.0) -> "Tolerances":
        return Tolerances(self.rtol / factor, self.atol / factor, self.refine)


DEFAULT_TOL = Tolerances()
