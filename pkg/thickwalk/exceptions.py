"""
Custom exception classes for thickwalk error handling.

These exceptions carry structured error information: an HTTP status code for the API,
a process exit code for the CLI and a details dict for logs and sentry context.
"""


class ThickWalkException(Exception):
    """Base exception for thickwalk"""

    def __init__(self, message: str, details: dict = None, status_code: int = 500, exit_code: int = 2):
        self.message = message
        self.details = details or {}
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(self.message)


class PreconditionViolation(ThickWalkException):
    """Raised when an operation is called outside its pre-condition"""

    def __init__(self, operation: str, detail: str = None, **context):
        super().__init__(
            message=f"Precondition violated in {operation}: {detail}",
            details={"operation": operation, "error": detail, **context},
            status_code=422,
        )


class ProposalExhaustedError(ThickWalkException):
    """Raised when no allowable reflection plane was found within the retry budget"""

    def __init__(self, vertex: int, retries: int):
        super().__init__(
            message=f"No allowable plane at vertex {vertex} after {retries} draws",
            details={"vertex": vertex, "retries": retries},
            status_code=500,
        )


class DegenerateClosureError(ThickWalkException):
    """Raised when a closure would produce a degenerate polygon"""

    def __init__(self, reason: str):
        super().__init__(
            message=f"Degenerate closure: {reason}",
            details={"reason": reason},
            status_code=422,
        )


class DiagramFailureError(ThickWalkException):
    """Raised when every projection direction tried was degenerate"""

    def __init__(self, retries: int):
        super().__init__(
            message=f"Could not find a generic projection after {retries} retries",
            details={"retries": retries},
            status_code=422,
        )


class FitDomainError(ThickWalkException):
    """Raised when a power-law fit gets unusable input"""

    def __init__(self, detail: str):
        super().__init__(
            message=f"Power-law fit domain error: {detail}",
            details={"error": detail},
            status_code=422,
        )


class InvalidConfigError(ThickWalkException):
    """Raised when a chain or campaign configuration is invalid"""

    def __init__(self, field: str, detail: str = None):
        super().__init__(
            message=f"Invalid configuration for '{field}': {detail}",
            details={"field": field, "error": detail},
            status_code=400,
            exit_code=1,
        )


class OutputPathError(ThickWalkException):
    """Raised when an output location cannot be written"""

    def __init__(self, path: str, detail: str = None):
        super().__init__(
            message=f"Cannot write output to {path}",
            details={"path": path, "error": detail},
            status_code=500,
        )


class SampleDataError(ThickWalkException):
    """Raised when a sample directory is missing, empty or unreadable"""

    def __init__(self, path: str, detail: str = None):
        super().__init__(
            message=f"Unusable sample data in {path}",
            details={"path": path, "error": detail},
            status_code=422,
        )
