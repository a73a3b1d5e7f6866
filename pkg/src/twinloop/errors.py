"""Exception hierarchy shared across the package."""


class TwinloopError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TwinloopError):
    """Invalid configuration, scenario file, or parameter set."""


class PreconditionError(TwinloopError):
    """An operation was called with inputs violating its contract."""


class DomainError(TwinloopError):
    """Mathematically invalid input (e.g. zero-norm vector for cosine)."""


class ModelFormatError(TwinloopError):
    """Persisted model file has the wrong version or shapes."""


class TrainingDivergenceError(TwinloopError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class ConsistencyError(TwinloopError):
    """Cross-module references disagree (unknown node, stale match id, ...)."""


class UndefinedMetricError(TwinloopError):
    """A metric has no defined value (e.g. violation rate with zero sessions)."""
