"""Exception types shared across the package."""


class KoopliftError(Exception):
    """Base class for all package errors."""


class DataError(KoopliftError):
    """Invalid trajectory data, shape mismatch, or unreadable input."""


class ConfigError(KoopliftError):
    """Invalid configuration: bad parameters, unknown kinds or keys."""


class RegressionError(KoopliftError):
    """Operator fitting failed (degenerate data, rank collapse, ...)."""
