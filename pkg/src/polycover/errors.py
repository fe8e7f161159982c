"""Exception types shared across the package."""


class ScenarioError(ValueError):
    """Raised when a scenario file fails to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ResourceCapError(RuntimeError):
    """Raised when a computation would exceed a configured resource cap."""
