"""
Exception hierarchy.

Every error carries an ``exit_code`` that the CLI returns as the process
status, plus a human readable ``detail`` and optional structured context.
"""

from typing import Any, Dict, Optional


class MaxlabError(Exception):
    exit_code = 1

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context


class ScalarModeError(MaxlabError):
    """Rational and float64 values were mixed."""


class DomainError(MaxlabError):
    """A precondition on the arguments does not hold."""


class InvalidFunctionError(MaxlabError):
    """A function representation or payload is malformed."""


class UnsupportedVariantError(MaxlabError):
    """The operator variant is not defined for this input type."""


class VerificationError(MaxlabError):
    """A counterexample verifier rejected a constructed member."""

    exit_code = 2

    def __init__(self, detail: str, report: Optional[Dict[str, Any]] = None, **context: Any):
        super().__init__(detail, **context)
        self.report = report or {}


class ViolationError(MaxlabError):
    """A fuzz battery or probe found candidate violations."""

    exit_code = 2
