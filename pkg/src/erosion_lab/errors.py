class WalkCapExceeded(RuntimeError):
    """A random walk ran past the configured step cap."""


class SolverError(ArithmeticError):
    """A linear solve missed its residual target."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class ResourceLimitError(RuntimeError):
    """An exact computation was requested beyond its supported size."""
