"""Coverage objective: relevance bits, feasibility, and the pool optimum.

The engine optimizes the number of items a title is relevant to, subject to
a character cap and the configured constraint predicates. Two relevance
scorers are provided: a deterministic keyword-overlap mock for hermetic runs
and an LLM judge for live ones; the config selects which applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Sequence

from .backends import AgentBackend
from .domain import (
    CandidateTitle,
    Item,
    KeywordSet,
    ModuleJob,
    PipelineConfig,
    RelevanceVector,
    get_predicate,
)
from .errors import JudgeParseFailure, NoFeasibleCandidate

# Prompt used by the llm_judge scorer; a configuration asset, replaceable at
# construction time.
JUDGE_PROMPT = (
    "You are a strict relevance judge for an eCommerce module title.\n"
    "\n"
    "Module title:\n"
    "{title}\n"
    "\n"
    "Item:\n"
    "{prod_info}\n"
    "\n"
    "Item keywords: {keywords}\n"
    "\n"
    "Does the module title accurately represent this item? Respond with\n"
    "exactly one character: 1 if relevant, 0 if not. Do not add any other\n"
    "text.\n"
)


def tokens(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs of ``text``."""
    return ["".join(g) for alnum, g in groupby(text.lower(), key=str.isalnum) if alnum]


def prod_info(item: Item) -> str:
    """Canonical one-line item description fed to prompts.

    Non-empty parts of (catalog, title_text, supplement) joined by " | ".
    Offline evaluators reproduce this construction byte for byte.
    """
    return " | ".join(part for part in (item.catalog, item.title_text, item.supplement) if part)


def derive_keywords(item: Item, limit: int) -> KeywordSet:
    """Keyword set built locally from item text, without any agent call.

    Used to measure coverage in runs that never distilled keywords (the
    single-call baseline mode). Takes the first ``limit`` distinct tokens of
    the item title, topped up from catalog and supplement tokens when the
    title falls short, then the id as a last resort.
    """
    seen: list[str] = []
    for source in (item.title_text, item.catalog, item.supplement):
        for tok in tokens(source):
            if tok not in seen:
                seen.append(tok)
        if len(seen) >= limit:
            break
    if not seen:
        seen = [item.id.replace(",", " ").strip() or "item"]
    return KeywordSet(item_id=item.id, keywords=tuple(seen[:limit]))


def mock_relevance(title_text: str, keywords: KeywordSet) -> int:
    """1 iff some keyword's token run appears contiguously in the title tokens.

    Exact token match, case-insensitive, no stemming: "laptops" does not
    match keyword "laptop".
    """
    title_tokens = tokens(title_text)
    for keyword in keywords.keywords:
        kw_tokens = tokens(keyword)
        if not kw_tokens:
            continue
        n = len(kw_tokens)
        for start in range(len(title_tokens) - n + 1):
            if title_tokens[start : start + n] == kw_tokens:
                return 1
    return 0


@dataclass(frozen=True)
class RelevanceScorer:
    """Binary relevance function; mock keyword overlap or an LLM judge."""

    kind: str = "mock_keyword_overlap"
    backend: AgentBackend | None = None
    parse_retries: int = 2
    judge_prompt: str = JUDGE_PROMPT

    def __post_init__(self) -> None:
        if self.kind not in ("mock_keyword_overlap", "llm_judge"):
            raise ValueError(f"unknown scorer kind {self.kind!r}")
        if self.kind == "llm_judge" and self.backend is None:
            raise ValueError("llm_judge scorer needs a backend")

    def score(self, title_text: str, item: Item, keywords: KeywordSet) -> int:
        if self.kind == "mock_keyword_overlap":
            return mock_relevance(title_text, keywords)
        return self._judge(title_text, item, keywords)

    def _judge(self, title_text: str, item: Item, keywords: KeywordSet) -> int:
        prompt = self.judge_prompt.format(
            title=title_text,
            prod_info=prod_info(item),
            keywords=", ".join(keywords.keywords),
        )
        assert self.backend is not None
        last = ""
        for _ in range(self.parse_retries + 1):
            last = self.backend.complete(prompt)
            verdict = last.strip()
            if verdict in ("0", "1"):
                return int(verdict)
        raise JudgeParseFailure(
            f"judge returned neither '1' nor '0' for item {item.id!r}",
            attempts=self.parse_retries + 1,
            last_response=last,
        )


def relevance(
    title: CandidateTitle,
    item: Item,
    keywords: KeywordSet,
    scorer: RelevanceScorer,
) -> int:
    """Binary relevance of ``title`` to ``item`` under ``scorer``."""
    if keywords.item_id != item.id:
        raise ValueError(
            f"keyword set for {keywords.item_id!r} scored against item {item.id!r}"
        )
    return scorer.score(title.text, item, keywords)


def coverage(
    title: CandidateTitle,
    job: ModuleJob,
    keywords: Sequence[KeywordSet],
    scorer: RelevanceScorer,
) -> RelevanceVector:
    """Relevance bits of ``title`` over every item of ``job``."""
    by_id = {ks.item_id: ks for ks in keywords}
    missing = [item.id for item in job.items if item.id not in by_id]
    if missing:
        raise ValueError(f"no keyword set for items {missing}")
    bits = {item.id: relevance(title, item, by_id[item.id], scorer) for item in job.items}
    return RelevanceVector.from_bits(bits)


@dataclass(frozen=True)
class Feasibility:
    """Verdict of the constraint check, with the failed predicate names."""

    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def feasible(title: CandidateTitle, config: PipelineConfig) -> Feasibility:
    """Check the character cap plus every configured constraint predicate.

    Violations are named: "length" for the character cap, otherwise the
    predicate's registered name.
    """
    violations: list[str] = []
    if title.char_len > config.max_chars:
        violations.append("length")
    for name in config.predicates:
        if not get_predicate(name)(title.text, config):
            violations.append(name)
    return Feasibility(ok=not violations, violations=tuple(violations))


def brute_force_opt(
    pool: Sequence[CandidateTitle],
    job: ModuleJob,
    keywords: Sequence[KeywordSet],
    scorer: RelevanceScorer,
    config: PipelineConfig,
) -> tuple[CandidateTitle, int]:
    """Best feasible title in ``pool`` by exhaustive scoring.

    Ties break toward smaller char_len, then lexicographically smaller text.
    Raises NoFeasibleCandidate when the whole pool is infeasible.
    """
    if not pool:
        raise ValueError("candidate pool is empty")
    best: CandidateTitle | None = None
    best_key: tuple[int, int, str] | None = None
    scored: dict[str, int] = {}
    for candidate in pool:
        if not feasible(candidate, config):
            continue
        if candidate.text not in scored:
            scored[candidate.text] = coverage(candidate, job, keywords, scorer).coverage
        key = (-scored[candidate.text], candidate.char_len, candidate.text)
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    if best is None:
        raise NoFeasibleCandidate(
            f"all {len(pool)} candidates violate the feasibility constraints"
        )
    return best, scored[best.text]
