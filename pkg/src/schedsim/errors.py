class ConfigError(ValueError):
    """Raised when a simulation parameter is missing, malformed or out of its valid range."""
