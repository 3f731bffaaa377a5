"""Shared error types."""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds the configured enumeration budget."""

    def __init__(self, message: str, cost: int | None = None):
        super().__init__(message)
        self.cost = cost
