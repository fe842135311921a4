"""Exception hierarchy shared across the package."""


class NodalError(Exception):
    """Base class for all errors raised by nehari_nodal."""


class InvalidResolutionError(NodalError, ValueError):
    pass


class InvalidDomainError(NodalError, ValueError):
    pass


class IncompatibleFunctionError(NodalError, ValueError):
    """A discrete function was evaluated against a mesh it does not live on."""


class ZeroFunctionError(NodalError, ValueError):
    pass


class NotSignChangingError(NodalError, ValueError):
    pass


class ProjectionError(NodalError, RuntimeError):
    pass


class ConvergenceError(NodalError, RuntimeError):
    """Iteration budget exhausted; ``best`` carries the best estimate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvalidInitError(NodalError, ValueError):
    pass


class DegenerateIterateError(NodalError, RuntimeError):
    pass


class DiagnosticError(NodalError, RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PreconditionError(NodalError, ValueError):
    pass


class EmptyDataError(NodalError, ValueError):
    pass


class AllStartsFailedError(NodalError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
