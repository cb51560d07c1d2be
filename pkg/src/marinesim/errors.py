"""Exception types shared across the package."""


class MarineSimError(Exception):
    """Base class for all package errors."""


class SingularAttitude(MarineSimError, ValueError):
    """Pitch angle is inside the guard band around +-pi/2."""


class ConfigError(MarineSimError, ValueError):
    """A parameter set or scenario file violates one of its invariants."""


class NonFiniteState(MarineSimError, FloatingPointError):
    """Integration produced NaN or inf.

    ``log`` holds the trajectory recorded up to the last finite state, when
    the failure happened inside a logged simulation.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class EmptySampleSet(MarineSimError, ValueError):
    """An operation that reduces over samples received none."""


class DivergedPerturbation(MarineSimError, FloatingPointError):
    """Finite-difference variation grew past the trust bound."""
