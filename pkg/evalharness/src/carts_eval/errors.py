"""Exception types for the evaluation harness."""

from __future__ import annotations


class EvalError(Exception):
    """Base class for harness errors."""


class SchemaError(EvalError):
    """An input file does not match the expected schema."""


class BackendError(EvalError):
    """Transport failure or non-success response from the judge backend."""


class ScriptExhausted(BackendError):
    """A scripted judge ran out of canned responses."""


class JudgeParseFailure(EvalError):
    """The judge returned neither \"1\" nor \"0\" after all retries."""


class ModelLoadError(EvalError):
    """A pretrained embedding model could not be loaded."""
