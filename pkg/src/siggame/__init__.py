"""Signaling-game benchmark: hard-coded sender languages, a trainable
recurrent receiver, and a multi-seed harness measuring acquisition speed
and held-out generalization."""

__version__ = "0.1.0"

from .errors import ConfigError, InputError, UsageError

__all__ = ["ConfigError", "InputError", "UsageError", "__version__"]
