"""Exception types shared across the engine."""

from __future__ import annotations


class CartsError(Exception):
    """Base class for all engine errors."""


class InvalidJob(CartsError):
    """A module job violates a structural invariant."""


class EmptyJob(InvalidJob):
    """The job carries no items."""


class EmptyItemId(InvalidJob):
    """An item id is empty."""


class DuplicateItemId(InvalidJob):
    """Two items in one job share an id."""


class EmptyTitleText(InvalidJob):
    """An item has no title text."""


class BackendError(CartsError):
    """Transport failure or non-success response from an agent backend."""


class ScriptExhausted(BackendError):
    """A scripted backend ran out of canned responses."""


class ParseFailure(CartsError):
    """An agent response stayed unparseable after all retries."""

    def __init__(self, message: str, attempts: int = 1, last_response: str = ""):
        super().__init__(message)
        self.attempts = attempts
        self.last_response = last_response


class JudgeParseFailure(ParseFailure):
    """A relevance judge returned neither \"1\" nor \"0\" after all retries."""


class TemplateError(CartsError):
    """A prompt template could not be rendered."""


class UnboundPlaceholder(TemplateError):
    """A template body references a placeholder with no binding."""


class NoFeasibleCandidate(CartsError):
    """Every candidate in a pool violates the feasibility constraints."""


class InvalidTheoryParams(CartsError):
    """Convergence-bound parameters are out of range."""


class JobFailed(CartsError):
    """A pipeline run could not produce a result for a job."""


class SchemaError(CartsError):
    """A dataset or result line does not match the expected schema."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason
