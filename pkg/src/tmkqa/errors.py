"""Shared exception types."""

from __future__ import annotations


class TmkqaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TmkqaError):
    """Syntax or mandatory-field error in a skill model file."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ModelValidationError(TmkqaError):
    """An operation required a defect-free model but got one with errors."""

    def __init__(self, defect_codes: list[str]):
        self.defect_codes = defect_codes
        super().__init__(
            "model has error-severity defects: " + ", ".join(defect_codes)
        )


class UnknownSkillError(TmkqaError):
    """Requested skill id is not loaded."""


class IndexMissingError(TmkqaError):
    """No index is available for the requested (skill, mode) pair."""


class TemplateError(TmkqaError):
    """A prompt template is missing, malformed, or lacks a placeholder."""


class GatewayError(TmkqaError):
    """Base class for chat-completion backend failures."""


class TransportError(GatewayError):
    """Remote endpoint unreachable or misbehaving after all retries."""

    def __init__(self, message: str, attempts: int, retryable: bool = True):
        self.attempts = attempts
        self.retryable = retryable
        super().__init__(f"{message} (after {attempts} attempt(s))")


class RateLimitError(TransportError):
    """Remote endpoint kept answering 429 until the retry budget ran out."""


class EmptyCompletionError(GatewayError):
    """Backend returned an empty completion."""


class EmbeddingError(TmkqaError):
    """Base class for embedding-provider failures."""


class EmbeddingTransportError(EmbeddingError):
    """Remote embedding endpoint failed after all retries."""

    def __init__(self, message: str, attempts: int, retryable: bool = True):
        self.attempts = attempts
        self.retryable = retryable
        super().__init__(f"{message} (after {attempts} attempt(s))")
