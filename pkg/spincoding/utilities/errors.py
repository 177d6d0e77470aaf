from __future__ import annotations

from typing import Any, Dict, Optional


class SpinCodingError(Exception):
    exit_code = 1
    code = "APP_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.message = message
        self.details = details or {}
        super().__init__(message)


class PreconditionError(SpinCodingError):
    exit_code = 1
    code = "PRECONDITION_FAILED"


class UsageError(SpinCodingError):
    exit_code = 1
    code = "USAGE_ERROR"


class ConfigError(SpinCodingError):
    exit_code = 1
    code = "CONFIG_ERROR"


class NumericalValidationError(SpinCodingError):
    exit_code = 2
    code = "NUMERICAL_VALIDATION"
