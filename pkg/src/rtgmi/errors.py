"""Error types shared across the package."""


class ConfigurationError(ValueError):
    """A run configuration is invalid or internally inconsistent."""


class NumericalConsistencyError(RuntimeError):
    """An internal arithmetic self-check failed (signals a fault, not bad input)."""
