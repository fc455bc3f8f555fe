"""Exception types raised across the package."""


class DomainError(ValueError):
    """A distribution or function was called outside its parameter domain."""


class SchemaError(ValueError):
    """Input file is missing required columns."""


class ValidationError(ValueError):
    """Input data violates a dataset invariant."""


class IncompatibleModelError(ValueError):
    """The requested model variant cannot be combined with the data or options."""


class InitializationError(RuntimeError):
    """The sampler could not find a finite starting point."""


class UndefinedReductionError(ValueError):
    """A reduction or its interval cannot be computed from the given counts."""


class ElicitationError(ValueError):
    """Quantile statements admit no matching prior."""
