"""Exception types shared across the package.

The CLI maps these to exit codes: DataError -> 1, ConfigError -> 2,
anything else -> 3.
"""


class LobstatesError(Exception):
    """Base class for package errors."""


class DataError(LobstatesError):
    """Unusable input data (malformed header, empty session, no quotes)."""


class ConfigError(LobstatesError):
    """Invalid configuration (unknown key, type mismatch, bad constraint)."""
