class SedError(Exception):
    pass


class ValidationError(SedError, ValueError):
    """Invalid parameters or inputs."""


class ConvergenceError(SedError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InstabilityError(ConvergenceError):
    """Time integration blew up."""
