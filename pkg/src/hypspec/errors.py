"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range where a formula is defined."""


class ConsistencyError(RuntimeError):
    """An internal geometric construction failed a self-check."""


class MeshError(RuntimeError):
    """A mesh could not be built or failed validation."""


class SnappingError(MeshError):
    """A twist is not an integer multiple of the angular mesh quantum."""


class SolverError(RuntimeError):
    """Factorization or eigen-iteration failure.

    ``residuals`` carries whatever residuals were reached before giving up,
    ``config`` the configuration that was being solved (if known).
    """

    def __init__(self, message, residuals=None, config=None):
        super().__init__(message)
        self.residuals = residuals
        self.config = config
