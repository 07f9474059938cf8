"""Agent roles: keyword distiller, title generator, evaluator, arbitrator.

Each role renders its template, calls the backend, and parses the response
strictly. Parsers are total: every call returns a value or raises a typed
error within parse_retries + 1 attempts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

from .backends import AgentBackend
from .coverage import RelevanceScorer, coverage, feasible, prod_info
from .domain import (
    CandidateTitle,
    Item,
    KeywordSet,
    ModuleJob,
    PipelineConfig,
    RelevanceVector,
)
from .errors import ParseFailure
from .templates import DEFAULT_TEMPLATES, TemplateSet

T = TypeVar("T")


def item_block(item: Item, keywords: KeywordSet | None) -> str:
    """One prompt line per item: id | catalog | title, plus keywords if any."""
    parts = [item.id, item.catalog, item.title_text]
    if keywords is not None:
        parts.append("keywords: " + ", ".join(keywords.keywords))
    return " | ".join(parts)


def prod_info_and_keys(job: ModuleJob, keywords: Sequence[KeywordSet] | None) -> str:
    """The per-item block list bound to {prod_info_and_keys}."""
    if keywords is None:
        return "\n".join(item_block(item, None) for item in job.items)
    by_id = {ks.item_id: ks for ks in keywords}
    return "\n".join(item_block(item, by_id.get(item.id)) for item in job.items)


def _retry_parse(
    backend: AgentBackend,
    prompt: str,
    parser: Callable[[str], T | None],
    parse_retries: int,
    what: str,
    seed: int | None = None,
) -> T:
    last = ""
    for _ in range(parse_retries + 1):
        last = backend.complete(prompt, seed=seed)
        value = parser(last)
        if value is not None:
            return value
    raise ParseFailure(
        f"could not parse {what} after {parse_retries + 1} attempts",
        attempts=parse_retries + 1,
        last_response=last,
    )


def parse_title_line(response: str) -> str | None:
    """Extract <text> from the first line shaped like ``title: <text>``.

    The prefix match is case-insensitive; surrounding quotes and whitespace
    are trimmed. Returns None when no line matches or the text is empty.
    """
    for raw in response.splitlines():
        line = raw.strip().strip('"').strip()
        if line.lower().startswith("title:"):
            text = line[len("title:") :].strip().strip('"').strip()
            if text:
                return text
    return None


def _parse_keywords(response: str) -> list[str] | None:
    parts = [part.strip() for part in response.split(",")]
    keywords = [part for part in parts if part]
    return keywords or None


def distill(
    item: Item,
    limit: int,
    backend: AgentBackend,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    parse_retries: int = 2,
    seed: int | None = None,
) -> KeywordSet:
    """Ask the keyword agent for up to ``limit`` keywords for one item."""
    if limit < 1:
        raise ValueError("keyword limit must be >= 1")
    prompt = templates.get("keywords").render(prod_info=prod_info(item))
    keywords = _retry_parse(
        backend, prompt, _parse_keywords, parse_retries, f"keywords for item {item.id!r}", seed
    )
    return KeywordSet(item_id=item.id, keywords=tuple(keywords[:limit]))


def generate_initial(
    job: ModuleJob,
    keywords: Sequence[KeywordSet],
    config: PipelineConfig,
    backend: AgentBackend,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    chain_id: int = 0,
    seed: int | None = None,
    provenance: str = "initial",
    include_keywords: bool = True,
) -> CandidateTitle:
    """Generate the first candidate title from the keyword-augmented prompt."""
    blocks = prod_info_and_keys(job, keywords if include_keywords else None)
    prompt = templates.get("gag").render(prod_info_and_keys=blocks)
    text = _retry_parse(
        backend, prompt, parse_title_line, config.parse_retries, "generated title", seed
    )
    return CandidateTitle.make(
        text, iteration=0, chain_id=chain_id, provenance=provenance
    )


@dataclass(frozen=True)
class FeedbackReport:
    """Evaluator output for one candidate title.

    ``flagged_uncovered`` always names at least one uncovered item whenever
    coverage is short of the item count: ids extracted from the critique
    when possible, otherwise the full uncovered set.
    """

    bits: RelevanceVector
    flagged_uncovered: tuple[str, ...]
    critique: str
    length_ok: bool


def extract_flagged(critique: str, job: ModuleJob, uncovered: Sequence[str]) -> tuple[str, ...]:
    """Uncovered items the critique names, by id or exact title substring."""
    lowered = critique.lower()
    uncovered_set = set(uncovered)
    flagged = []
    for item in job.items:
        if item.id not in uncovered_set:
            continue
        if item.id.lower() in lowered or item.title_text.lower() in lowered:
            flagged.append(item.id)
    return tuple(flagged)


def evaluate(
    title: CandidateTitle,
    job: ModuleJob,
    keywords: Sequence[KeywordSet],
    scorer: RelevanceScorer,
    backend: AgentBackend,
    config: PipelineConfig,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    seed: int | None = None,
) -> FeedbackReport:
    """Score the title, collect a critique, and flag uncovered items."""
    vector = coverage(title, job, keywords, scorer)
    prompt = templates.get("feedback").render(
        title=title.text, prod_info_and_keys=prod_info_and_keys(job, keywords)
    )
    critique = backend.complete(prompt, seed=seed)
    uncovered = vector.uncovered()
    flagged = extract_flagged(critique, job, uncovered)
    if uncovered and not flagged:
        flagged = tuple(uncovered)  # guarantee at least one flag when short
    return FeedbackReport(
        bits=vector,
        flagged_uncovered=flagged,
        critique=critique,
        length_ok=feasible(title, config).ok,
    )


def regenerate(
    prev: CandidateTitle,
    report: FeedbackReport,
    job: ModuleJob,
    keywords: Sequence[KeywordSet],
    backend: AgentBackend,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    parse_retries: int = 2,
    seed: int | None = None,
) -> CandidateTitle:
    """Produce the next candidate from the previous title and its critique."""
    prompt = templates.get("regeneration").render(
        prod_info_and_keys=prod_info_and_keys(job, keywords),
        title=prev.text,
        feedback=report.critique,
    )
    text = _retry_parse(backend, prompt, parse_title_line, parse_retries, "refined title", seed)
    return CandidateTitle.make(
        text,
        iteration=prev.iteration + 1,
        chain_id=prev.chain_id,
        provenance="refined",
        trace=prev.trace + (report.critique,),
    )


@dataclass(frozen=True)
class ModeratorEntry:
    text: str
    coverage: int
    total_items: int
    char_len: int
    verdict: str
    provenance: str


@dataclass(frozen=True)
class ModeratorSummary:
    """Deterministic per-candidate digest handed to arbitration."""

    entries: tuple[ModeratorEntry, ...]

    def lines(self) -> list[str]:
        return [
            f'{i + 1}. "{e.text}" | coverage={e.coverage}/{e.total_items}'
            f" | chars={e.char_len} | {e.verdict} | {e.provenance}"
            for i, e in enumerate(self.entries)
        ]

    @property
    def text(self) -> str:
        return "\n".join(self.lines())

    def entry_for(self, title_text: str) -> ModeratorEntry:
        for entry in self.entries:
            if entry.text == title_text:
                return entry
        raise ValueError(f"no summary entry for title {title_text!r}")


def moderate(
    scored: Sequence[tuple[CandidateTitle, RelevanceVector]],
    config: PipelineConfig,
) -> ModeratorSummary:
    """Summarize candidates in input order; a formatter, not an agent call."""
    if not scored:
        raise ValueError("moderate needs at least one candidate")
    entries = []
    for title, vector in scored:
        verdict_check = feasible(title, config)
        verdict = (
            "feasible"
            if verdict_check.ok
            else "infeasible: " + ", ".join(verdict_check.violations)
        )
        entries.append(
            ModeratorEntry(
                text=title.text,
                coverage=vector.coverage,
                total_items=len(vector.bits),
                char_len=title.char_len,
                verdict=verdict,
                provenance=f"{title.provenance}, iteration {title.iteration}, chain {title.chain_id}",
            )
        )
    return ModeratorSummary(entries=tuple(entries))


def _rule_pick(
    candidates: Sequence[CandidateTitle], summary: ModeratorSummary
) -> CandidateTitle:
    def key(candidate: CandidateTitle):
        entry = summary.entry_for(candidate.text)
        infeasible = not entry.verdict.startswith("feasible")
        return (infeasible, -entry.coverage, candidate.char_len, candidate.text)

    return min(candidates, key=key)


def arbitrate(
    candidates: Sequence[CandidateTitle],
    summary: ModeratorSummary,
    backend: AgentBackend | None,
    mode: str = "rule",
    *,
    job: ModuleJob | None = None,
    keywords: Sequence[KeywordSet] | None = None,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    parse_retries: int = 2,
    seed: int | None = None,
) -> CandidateTitle:
    """Select the final title among the candidates.

    Rule mode prefers feasible candidates, then maximal coverage, then
    smaller char_len, then lexicographically smaller text. LLM mode runs a
    pairwise tournament with the two-title arbitrator template; the reply
    must echo one input verbatim (after trimming), otherwise the bout is
    retried and ultimately the whole selection falls back to rule mode.
    """
    if not candidates:
        raise ValueError("arbitrate needs at least one candidate")
    deduped: list[CandidateTitle] = []
    seen: set[str] = set()
    for candidate in candidates:
        if candidate.text not in seen:
            deduped.append(candidate)
            seen.add(candidate.text)
    if len(deduped) == 1 or mode == "rule":
        return _rule_pick(deduped, summary)
    if mode != "llm":
        raise ValueError(f"unknown arbitration mode {mode!r}")
    if backend is None or job is None:
        raise ValueError("llm arbitration needs a backend and the job")
    blocks = prod_info_and_keys(job, keywords)
    winner = deduped[0]
    for challenger in deduped[1:]:
        prompt = templates.get("arbitrator").render(
            title=winner.text, title_2=challenger.text, prod_info_and_keys=blocks
        )
        picked: CandidateTitle | None = None
        for _ in range(parse_retries + 1):
            reply = backend.complete(prompt, seed=seed).strip().strip('"').strip()
            if reply == winner.text:
                picked = winner
                break
            if reply == challenger.text:
                picked = challenger
                break
        if picked is None:
            return _rule_pick(deduped, summary)
        winner = picked
    return winner
