class ConfigError(ValueError):
    """Raised when an experiment or algorithm configuration is invalid."""
