"""Value types shared by every stage of the engine.

All types are immutable after construction and safe to share across
concurrent tasks. Character length is always the count of Unicode code
points, never bytes or grapheme clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import (
    DuplicateItemId,
    EmptyItemId,
    EmptyJob,
    EmptyTitleText,
    InvalidTheoryParams,
)

PROVENANCES = ("initial", "refined", "baseline")


def char_len(text: str) -> int:
    """Unicode code-point count of ``text``."""
    return len(text)


def word_count(text: str) -> int:
    """Number of whitespace-separated tokens in ``text``."""
    return len(text.split())


@dataclass(frozen=True)
class Item:
    """One recommended item: catalog path, display title, optional extras."""

    id: str
    catalog: str
    title_text: str
    supplement: str = ""


@dataclass(frozen=True)
class ModuleJob:
    """A carousel of items that needs one shared module title."""

    module_id: str
    items: tuple[Item, ...]
    anchor_id: str | None = None

    def item_ids(self) -> tuple[str, ...]:
        return tuple(item.id for item in self.items)


def validate_job(job: ModuleJob) -> ModuleJob:
    """Return ``job`` unchanged if all structural invariants hold.

    Raises EmptyJob, EmptyItemId, DuplicateItemId, or EmptyTitleText.
    """
    if not job.items:
        raise EmptyJob(f"job {job.module_id!r} has no items")
    seen: set[str] = set()
    for item in job.items:
        if not item.id:
            raise EmptyItemId(f"job {job.module_id!r} has an item with an empty id")
        if item.id in seen:
            raise DuplicateItemId(f"job {job.module_id!r} repeats item id {item.id!r}")
        seen.add(item.id)
        if not item.title_text:
            raise EmptyTitleText(f"item {item.id!r} has no title text")
    return job


@dataclass(frozen=True)
class KeywordSet:
    """Keywords distilled for one item; at most the configured count."""

    item_id: str
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError(f"keyword set for {self.item_id!r} is empty")
        for kw in self.keywords:
            if not kw:
                raise ValueError(f"empty keyword for item {self.item_id!r}")
            if "," in kw:
                raise ValueError(f"keyword {kw!r} contains a comma")


@dataclass(frozen=True)
class CandidateTitle:
    """A generated module title plus bookkeeping for audits.

    ``trace`` accumulates the feedback snippets that led to this title.
    """

    text: str
    char_len: int
    word_count: int
    iteration: int
    chain_id: int
    provenance: str
    trace: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("title text must be a single line")
        if self.char_len != char_len(self.text):
            raise ValueError(
                f"char_len {self.char_len} does not match text ({char_len(self.text)})"
            )
        if self.word_count != word_count(self.text):
            raise ValueError(
                f"word_count {self.word_count} does not match text ({word_count(self.text)})"
            )
        if self.iteration < 0:
            raise ValueError("iteration must be >= 0")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @classmethod
    def make(
        cls,
        text: str,
        *,
        iteration: int = 0,
        chain_id: int = 0,
        provenance: str = "initial",
        trace: tuple[str, ...] = (),
    ) -> "CandidateTitle":
        """Build a title with derived length fields."""
        return cls(
            text=text,
            char_len=char_len(text),
            word_count=word_count(text),
            iteration=iteration,
            chain_id=chain_id,
            provenance=provenance,
            trace=trace,
        )


@dataclass(frozen=True)
class RelevanceVector:
    """Per-item relevance bits for one title over one job."""

    bits: Mapping[str, int]
    coverage: int

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits.values()):
            raise ValueError("relevance bits must be 0 or 1")
        if self.coverage != sum(self.bits.values()):
            raise ValueError("coverage must equal the sum of bits")

    @classmethod
    def from_bits(cls, bits: Mapping[str, int]) -> "RelevanceVector":
        return cls(bits=dict(bits), coverage=sum(bits.values()))

    def uncovered(self) -> tuple[str, ...]:
        return tuple(item_id for item_id, bit in self.bits.items() if bit == 0)

    def validate_for(self, job: ModuleJob) -> None:
        if set(self.bits) != set(job.item_ids()):
            raise ValueError("relevance bits do not key the job's item ids")


@dataclass(frozen=True)
class BoundParams:
    """Inputs for deriving the refinement budget from the convergence bound."""

    alpha: float
    beta: float
    gamma: float
    epsilon: float
    opt_estimate: int | None = None  # defaults to the job's item count
    c0_estimate: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidTheoryParams(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise InvalidTheoryParams(f"beta must be in (0, 1], got {self.beta}")
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidTheoryParams(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidTheoryParams(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.opt_estimate is not None and self.opt_estimate < 0:
            raise InvalidTheoryParams("opt_estimate must be >= 0")
        if self.c0_estimate < 0:
            raise InvalidTheoryParams("c0_estimate must be >= 0")


# Named constraint predicates over the title string. The set is extensible:
# register more via register_predicate and list their names in
# PipelineConfig.predicates. The length cap is a separate, always-on check.
PredicateFn = Callable[[str, "PipelineConfig"], bool]

_PREDICATES: dict[str, PredicateFn] = {}


def register_predicate(name: str, fn: PredicateFn) -> None:
    _PREDICATES[name] = fn


def get_predicate(name: str) -> PredicateFn:
    try:
        return _PREDICATES[name]
    except KeyError:
        raise ValueError(f"unknown constraint predicate {name!r}") from None


register_predicate(
    "word_count", lambda text, config: word_count(text) <= config.max_words
)
register_predicate(
    "single_line", lambda text, config: "\n" not in text and "\r" not in text
)

DEFAULT_PREDICATES = ("word_count", "single_line")


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one engine run.

    Exactly one of ``iterations`` (explicit refinement rounds per chain) or
    ``bound`` (derive the budget from the convergence bound) must be set.
    """

    max_chars: int = 60
    max_words: int = 10
    keywords_per_item: int = 5
    chains: int = 1
    iterations: int | None = None
    bound: BoundParams | None = None
    backend: str = "mock"  # "mock" | "llm"
    scorer: str = "mock"  # "mock" | "llm_judge"
    temperature: float = 0.0
    parse_retries: int = 2
    seed: int = 0
    arbiter: str = "rule"  # "rule" | "llm"
    predicates: tuple[str, ...] = DEFAULT_PREDICATES

    def __post_init__(self) -> None:
        if self.max_chars <= 0:
            raise ValueError("max_chars must be > 0")
        if self.max_words <= 0:
            raise ValueError("max_words must be > 0")
        if self.keywords_per_item < 1:
            raise ValueError("keywords_per_item must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if (self.iterations is None) == (self.bound is None):
            raise ValueError("exactly one of iterations or bound must be set")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.backend not in ("mock", "llm"):
            raise ValueError(f"unknown backend kind {self.backend!r}")
        if self.scorer not in ("mock", "llm_judge"):
            raise ValueError(f"unknown scorer kind {self.scorer!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.parse_retries < 0:
            raise ValueError("parse_retries must be >= 0")
        if self.arbiter not in ("rule", "llm"):
            raise ValueError(f"unknown arbiter mode {self.arbiter!r}")
        for name in self.predicates:
            get_predicate(name)
