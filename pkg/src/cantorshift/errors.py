"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class InsufficientDepthError(ValueError):
    """A digit string does not carry enough known digits for the request.

    `required` holds the minimal prefix length that would have sufficed,
    when the caller can compute it.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class InvalidSystemError(ValueError):
    """A coefficient system failed validation; `report` has the details."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
