"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class TruncationError(ValueError):
    """A series evaluation was requested outside its reliable range."""


class MeshError(RuntimeError):
    """The requested triangulation could not be built."""


class SolverError(RuntimeError):
    """A numerical solve failed (singular system, no bracket, no convergence)."""


class ConfigurationError(ValueError):
    """A corpus file or corpus entry is malformed or violates a precondition."""


class StageError(RuntimeError):
    """Wraps a failure inside the verification pipeline with the stage that raised it."""

    def __init__(self, stage, entry, cause):
        self.stage = stage
        self.entry = entry
        self.cause = cause
        super().__init__(f"{entry}: stage '{stage}' failed: {cause}")
