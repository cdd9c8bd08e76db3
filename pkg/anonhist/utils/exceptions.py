"""
Custom exceptions for the anonymized histogram toolkit.

Every exception carries the process exit code the CLI reports for it.
"""
from typing import Any, Dict, Optional


class AnonHistError(Exception):
    """Base exception for anonymized histogram errors."""

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class PreconditionError(AnonHistError):
    """Exception raised when an operation's input contract is violated."""

    exit_code = 2


class PartitionFormatError(PreconditionError):
    """Exception raised when a partition or vector file cannot be parsed."""

    def __init__(
        self,
        message: str,
        line_number: Optional[int] = None,
        **kwargs
    ):
        self.line_number = line_number

        details = {
            "line_number": line_number,
            **kwargs
        }

        super().__init__(message, error_code="partition_format", details=details)


class InvalidPartitionError(PreconditionError):
    """Exception raised for sequences that are not valid partitions or prevalences."""
    pass


class PartitionOverflowError(InvalidPartitionError):
    """Exception raised when counts leave the signed 64-bit range."""
    pass


class SizeBoundExceededError(PreconditionError):
    """Exception raised when a partition is larger than the declared size bound."""

    def __init__(self, size: int, size_bound: int, **kwargs):
        self.size = size
        self.size_bound = size_bound

        details = {
            "size": size,
            "size_bound": size_bound,
            **kwargs
        }

        super().__init__(
            f"partition size {size} exceeds size bound {size_bound}",
            error_code="size_bound",
            details=details,
        )


class PrivacyBudgetError(PreconditionError):
    """Exception raised for unusable privacy parameters."""
    pass


class EncodingParameterError(PreconditionError):
    """Exception raised when (n, delta) violate the encoding precondition."""
    pass


class GuardrailError(AnonHistError):
    """Exception raised when an exhaustive oracle is asked to go beyond its limit."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        limit: int,
        requested: int,
        **kwargs
    ):
        self.limit = limit
        self.requested = requested

        details = {
            "limit": limit,
            "requested": requested,
            **kwargs
        }

        super().__init__(message, error_code="guardrail", details=details)


class CertificationError(AnonHistError):
    """Exception raised when a constructed object fails its own certificate."""

    exit_code = 4


class EncodingInvariantError(CertificationError):
    """Exception raised when a derived encoding parameter breaks its bounds."""
    pass
