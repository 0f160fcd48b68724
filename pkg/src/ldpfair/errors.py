"""Exception hierarchy shared across the package."""


class LdpFairError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(LdpFairError, ValueError):
    """An operation was called with arguments outside its domain."""


class ConfigError(LdpFairError):
    """A config document is malformed or internally inconsistent."""


class IngestError(LdpFairError):
    """A data file cannot be loaded (missing file, header mismatch, degenerate outcome)."""
