"""Exception types shared across the package."""


class MemsepError(Exception):
    """Base class for all package-specific errors."""


class NotOnSurface(MemsepError):
    """A surface query was made at a point not on the membrane boundary."""


class ConvergenceFailure(MemsepError):
    """An iterative solver did not reach its tolerance within its budget."""


class InvariantViolation(MemsepError):
    """A runtime invariant of an experiment failed (CLI exit code 2)."""


class ConfigError(MemsepError):
    """An experiment configuration is malformed or inconsistent."""
