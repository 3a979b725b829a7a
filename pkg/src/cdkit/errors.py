"""Exception types shared across the toolkit."""


class CdkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidProfileError(CdkitError, ValueError):
    """Curvature profile violates its construction invariants."""


class DomainError(CdkitError, ValueError):
    """A parameter lies outside the admissible range of an operation."""


class MarginalMismatchError(CdkitError, ValueError):
    """Coupling marginals do not match the prescribed measures."""


class NormalizationError(CdkitError, ValueError):
    """Operation requires a (pointed-)normalized space and got something else."""
