"""Exception hierarchy shared by all modules."""


class FRSError(Exception):
    """Base class for errors raised by :mod:`frs`."""


class DimensionError(FRSError, ValueError):
    """Shapes of the inputs are incompatible."""


class DomainError(FRSError, ValueError):
    """An input lies outside the domain of an operation (e.g. indefinite)."""


class SingularMatrixError(DomainError):
    """A spectral function hit an eigenvalue below the admissible floor."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class EigenSolverError(FRSError, ArithmeticError):
    """The symmetric eigensolver failed to converge."""


class ConvergenceError(FRSError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, grad_norm=None, iterations=None):
        super().__init__(message)
        self.grad_norm = grad_norm
        self.iterations = iterations


class IntegrationError(FRSError, RuntimeError):
    """A time integrator left the admissible state space."""
