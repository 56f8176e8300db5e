"""Exception types raised by the numerical pipelines."""


class DimensionMismatch(ValueError):
    """Matrix or diagram dimensions are inconsistent."""


class IntegrationFailure(RuntimeError):
    """The adaptive integrator stopped without a usable verdict."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class SwitchNotReached(IntegrationFailure):
    """Inverse-phase switch never happened; controllability is suspect or the
    switch threshold is too tight for the horizon."""


class ConservationViolated(RuntimeError):
    """A conserved quantity drifted beyond the abort threshold."""
