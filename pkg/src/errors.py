"""Exception hierarchy shared by the numerical engines and the CLI."""

from typing import Any, Dict, Optional


class ErgocapError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ErgocapError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionError(DomainError):
    """Matrix or channel sizes are inconsistent."""


class ConvergenceError(ErgocapError, ArithmeticError):
    """An iterative procedure did not reach its tolerance.

    Carries the method name and the diagnostics needed to judge the failure
    (last values, sizes, term counts). Never accompanied by a value.
    """

    def __init__(self, message: str, method: str = "", diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.method = method
        self.diagnostics = dict(diagnostics or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": str(self), "method": self.method, "diagnostics": self.diagnostics}


class ResourceLimitError(ErgocapError, MemoryError):
    """A requested allocation would exhaust available memory."""
