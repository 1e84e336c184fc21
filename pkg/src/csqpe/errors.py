"""Package-level exception types."""


class ConfigurationError(ValueError):
    """Raised when a run configuration or operation precondition is invalid.

    The CLI maps this to exit code 1; everything else that escapes is a
    runtime failure (exit code 2).
    """
