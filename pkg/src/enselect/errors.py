"""Exception types shared across the package."""


class DatasetFormatError(ValueError):
    """Raised when a prediction-matrix CSV is malformed.

    ``line`` is the 1-based line number of the offending row (0 for
    file-level problems such as an empty file).
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ConfigError(ValueError):
    """Raised when an experiment configuration is invalid."""


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds a documented size cap."""
