"""Exception types raised across the package."""


class PhaseNoiseError(Exception):
    """Base class for all package errors."""


class ParameterError(PhaseNoiseError, ValueError):
    """A numeric parameter is outside its declared range."""


class StateError(PhaseNoiseError, ValueError):
    """A density matrix is not Hermitian, not unit trace, or not positive."""


class ValidityError(PhaseNoiseError, ValueError):
    """Channel coefficients do not define a completely positive map."""


class ShapeError(PhaseNoiseError, ValueError):
    """A two-qubit state is not of X shape."""


class ClassError(PhaseNoiseError, ValueError):
    """Parameters fall outside the Bell-diagonal class."""


class ConvergenceError(PhaseNoiseError, RuntimeError):
    """The truncated moment hierarchy did not converge.

    Attributes
    ----------
    previous, last : ndarray
        The last two iterates ``(gamma_cap_1, gamma_cap_2)`` stacked as rows.
    """

    def __init__(self, message, previous=None, last=None):
        super().__init__(message)
        self.previous = previous
        self.last = last
