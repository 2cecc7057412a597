"""
Exception hierarchy for the HDX toolkit.
Every error maps onto one CLI exit code.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_PROPERTY_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class HDXError(Exception):
    """Base exception for all toolkit errors."""
    exit_code = EXIT_PROPERTY_FAILED


class DomainError(HDXError):
    """A mathematical precondition was violated."""
    exit_code = EXIT_USAGE


class UsageError(DomainError):
    """Bad command line or configuration."""
    exit_code = EXIT_USAGE


class IntegrityError(HDXError):
    """An internal consistency check failed."""
    exit_code = EXIT_PROPERTY_FAILED


class CertificateFailure(HDXError):
    """A verified property turned out false."""
    exit_code = EXIT_PROPERTY_FAILED

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class ResourceBudgetError(HDXError):
    """A computation would exceed the configured budget."""
    exit_code = EXIT_BUDGET

    def __init__(self, message: str, predicted: Optional[float] = None, budget: Optional[float] = None):
        super().__init__(message)
        self.predicted = predicted
        self.budget = budget


def exit_code_for(exc: BaseException) -> int:
    """Map an exception onto the CLI exit code."""
    if isinstance(exc, HDXError):
        return exc.exit_code
    return EXIT_PROPERTY_FAILED
