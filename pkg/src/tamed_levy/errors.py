class ConfigurationError(ValueError):
    """Invalid problem, grid or experiment settings (CLI exit code 2)."""


class InvariantError(RuntimeError):
    """An internal consistency check failed (CLI exit code 3)."""
