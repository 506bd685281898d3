"""Exception types shared across the package."""


class LassoError(Exception):
    """Base class for all package errors."""


class ValidationError(LassoError):
    """Invalid input data or configuration (CLI exit code 1)."""


class ConfigError(ValidationError):
    """Problem configuration file cannot be parsed or violates the schema."""


class NumericalError(LassoError):
    """A numerical procedure failed: overflow, non-convergence, degeneracy (CLI exit code 2)."""
