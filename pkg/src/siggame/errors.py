"""Error types shared across the package.

Three failure categories: bad wiring (shapes, invalid settings), bad data
fed to a valid surface, and misuse of an API contract.
"""


class ConfigError(ValueError):
    """Invalid configuration: dimension mismatch, bad hyperparameter, bad preset."""


class InputError(ValueError):
    """Well-configured surface fed an out-of-domain value."""


class UsageError(RuntimeError):
    """API contract violation, e.g. backward on a non-scalar node."""
