"""Shared exception types.

The CLI maps these onto exit codes: ConfigError to 2, ScaleGuardError
to 3, NumericalError to 4.
"""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class ScaleGuardError(RuntimeError):
    """An exhaustive computation would exceed its size guard."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
