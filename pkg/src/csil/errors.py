"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value. ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ProtocolError(RuntimeError):
    """The online reveal protocol was violated (or a task was empty)."""


class UnsupportedConfigurationError(ConfigError):
    """Requested combination has no supported solver."""
