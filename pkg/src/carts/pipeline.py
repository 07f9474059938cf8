"""End-to-end orchestration: distill, generate, refine, moderate, arbitrate.

The refinement loop enforces a monotonic best-so-far guard: a regenerated
title replaces the best only when it is feasible and strictly raises
coverage. Rejected steps stay in the trace for audit. A run's final title
is feasible whenever any title generated during the run was feasible.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .agents import (
    FeedbackReport,
    arbitrate,
    distill,
    evaluate,
    generate_initial,
    moderate,
    regenerate,
)
from .backends import AgentBackend, ScriptedBackend, derive_seed
from .coverage import (
    RelevanceScorer,
    brute_force_opt,
    coverage,
    derive_keywords,
    feasible,
)
from .domain import (
    CandidateTitle,
    KeywordSet,
    ModuleJob,
    PipelineConfig,
    RelevanceVector,
    validate_job,
)
from .errors import BackendError, JobFailed, NoFeasibleCandidate, ParseFailure
from .lab import iteration_bound
from .templates import DEFAULT_TEMPLATES, TemplateSet

log = logging.getLogger(__name__)

_AGENT_ERRORS = (ParseFailure, BackendError)


class _CachingScorer:
    """Run-scoped memo around a scorer: one verdict per (title, item) pair.

    Keeps repeat scoring free and, for judge-backed scorers, guarantees a
    title/item pair cannot flip verdicts within a run.
    """

    def __init__(self, inner: RelevanceScorer):
        self._inner = inner
        self._bits: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()

    def score(self, title_text: str, item, keywords) -> int:
        key = (title_text, item.id)
        with self._lock:
            if key in self._bits:
                return self._bits[key]
        bit = self._inner.score(title_text, item, keywords)
        with self._lock:
            self._bits.setdefault(key, bit)
            return self._bits[key]


@dataclass(frozen=True)
class TraceStep:
    """One recorded candidate: its coverage, the critique that led to it,
    and whether the guard accepted it as the new best."""

    title: CandidateTitle
    coverage: int
    feedback: FeedbackReport | None
    accepted: bool


@dataclass(frozen=True)
class RefinementTrace:
    """Full history of one generator-feedback chain."""

    chain_id: int
    steps: tuple[TraceStep, ...]
    best: CandidateTitle
    degraded: bool = False
    error: str = ""

    def best_coverage_trace(self) -> list[int]:
        """Coverage of the best-so-far title after each recorded step."""
        best_cov: int | None = None
        out: list[int] = []
        for step in self.steps:
            if step.accepted or best_cov is None:
                best_cov = step.coverage
            out.append(best_cov)
        return out


@dataclass(frozen=True)
class PipelineResult:
    """Everything one run produced, sufficient to audit and re-score it."""

    module_id: str
    mode: str  # "carts" | "vanilla"
    final: CandidateTitle
    final_coverage: RelevanceVector
    final_feasible: bool
    candidates: tuple[CandidateTitle, ...]
    traces: tuple[RefinementTrace, ...]
    pool_opt: int | None  # best feasible coverage over the run's pool
    failed_chains: tuple[int, ...]
    config: PipelineConfig
    seed: int


def iteration_budget(config: PipelineConfig, n_items: int | None = None) -> int:
    """Refinement rounds per chain: explicit, or derived from the bound.

    In bound mode the optimum estimate defaults to the job's item count
    (the most conservative budget) and the starting coverage to zero.
    """
    if config.iterations is not None:
        return config.iterations
    bound = config.bound
    assert bound is not None  # config validation guarantees one of the two
    opt_estimate = bound.opt_estimate if bound.opt_estimate is not None else n_items
    if opt_estimate is None:
        raise ValueError("bound mode needs opt_estimate or the job's item count")
    c0 = min(bound.c0_estimate, opt_estimate)
    return iteration_bound(
        bound.alpha, bound.beta, bound.gamma, opt_estimate, c0, bound.epsilon
    )


def refine_chain(
    initial: CandidateTitle,
    job: ModuleJob,
    keywords: list[KeywordSet],
    config: PipelineConfig,
    backend: AgentBackend,
    scorer: RelevanceScorer,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    seed: int | None = None,
    t_budget: int | None = None,
) -> RefinementTrace:
    """Run up to the budgeted evaluate/regenerate rounds on one chain.

    A new title becomes the best only when it is feasible and strictly
    raises coverage; when the current best is infeasible, a feasible title
    that at least matches its coverage also takes over. Regenerations that
    echo the best title verbatim are skipped without recording a step. The
    loop stops early once every item is covered by a feasible title. Agent
    failures mid-chain return the trace so far, flagged degraded.
    """
    if t_budget is None:
        t_budget = iteration_budget(config, n_items=len(job.items))
    n_items = len(job.items)
    best = initial
    best_vec = coverage(initial, job, keywords, scorer)
    best_ok = feasible(initial, config).ok
    steps = [TraceStep(initial, best_vec.coverage, None, accepted=True)]

    for _ in range(t_budget):
        if best_vec.coverage >= n_items and best_ok:
            break
        try:
            report = evaluate(
                best, job, keywords, scorer, backend, config,
                templates=templates, seed=seed,
            )
            candidate = regenerate(
                best, report, job, keywords, backend,
                templates=templates, parse_retries=config.parse_retries, seed=seed,
            )
            if candidate.text == best.text:
                continue  # echo: nothing new to score or record
            vec = coverage(candidate, job, keywords, scorer)
        except _AGENT_ERRORS as exc:
            return RefinementTrace(
                chain_id=initial.chain_id,
                steps=tuple(steps),
                best=best,
                degraded=True,
                error=f"{exc.__class__.__name__}: {exc}",
            )
        ok = feasible(candidate, config).ok
        accept = ok and (
            vec.coverage > best_vec.coverage
            or (not best_ok and vec.coverage >= best_vec.coverage)
        )
        steps.append(TraceStep(candidate, vec.coverage, report, accepted=accept))
        if accept:
            best, best_vec, best_ok = candidate, vec, ok

    return RefinementTrace(chain_id=initial.chain_id, steps=tuple(steps), best=best)


def _collect_pool(
    initials: list[CandidateTitle], traces: list[RefinementTrace]
) -> list[CandidateTitle]:
    """Every title generated in the run, in generation order."""
    pool = list(initials)
    for trace in traces:
        pool.extend(step.title for step in trace.steps[1:])
    return pool


def run_carts(
    job: ModuleJob,
    config: PipelineConfig,
    backend: AgentBackend,
    scorer: RelevanceScorer,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    chain_concurrency: int = 1,
) -> PipelineResult:
    """Full pipeline: keywords, k initial titles, refinement, arbitration.

    Chains run sequentially unless chain_concurrency > 1; scripted backends
    always run sequentially so replay order stays reproducible.
    """
    validate_job(job)
    scorer = _CachingScorer(scorer)  # type: ignore[assignment]
    t_budget = iteration_budget(config, n_items=len(job.items))
    try:
        keywords = [
            distill(
                item, config.keywords_per_item, backend,
                templates=templates, parse_retries=config.parse_retries,
                seed=config.seed,
            )
            for item in job.items
        ]
    except _AGENT_ERRORS as exc:
        raise JobFailed(f"keyword distillation failed: {exc}") from exc

    initials: list[tuple[int, CandidateTitle]] = []
    failed_chains: list[int] = []
    for chain_id in range(config.chains):
        chain_seed = derive_seed(config.seed, chain_id)
        try:
            initials.append(
                (
                    chain_id,
                    generate_initial(
                        job, keywords, config, backend,
                        templates=templates, chain_id=chain_id, seed=chain_seed,
                    ),
                )
            )
        except _AGENT_ERRORS as exc:
            log.warning("chain %d failed to generate an initial title: %s", chain_id, exc)
            failed_chains.append(chain_id)
    if not initials:
        raise JobFailed(f"all {config.chains} chains failed for job {job.module_id!r}")

    def _refine(entry: tuple[int, CandidateTitle]) -> RefinementTrace | Exception:
        chain_id, initial = entry
        try:
            return refine_chain(
                initial, job, keywords, config, backend, scorer,
                templates=templates, seed=derive_seed(config.seed, chain_id),
                t_budget=t_budget,
            )
        except _AGENT_ERRORS as exc:  # scoring the initial title failed
            return exc

    sequential = chain_concurrency <= 1 or isinstance(backend, ScriptedBackend)
    if sequential:
        outcomes = [_refine(entry) for entry in initials]
    else:
        with ThreadPoolExecutor(max_workers=chain_concurrency) as pool:
            outcomes = list(pool.map(_refine, initials))
    traces = []
    for (chain_id, _), outcome in zip(initials, outcomes):
        if isinstance(outcome, Exception):
            log.warning("chain %d failed during refinement: %s", chain_id, outcome)
            failed_chains.append(chain_id)
        else:
            traces.append(outcome)
    if not traces:
        raise JobFailed(f"all {config.chains} chains failed for job {job.module_id!r}")
    traces.sort(key=lambda t: t.chain_id)

    chain_bests = [trace.best for trace in traces]
    scored = [(best, coverage(best, job, keywords, scorer)) for best in chain_bests]
    summary = moderate(scored, config)
    final = arbitrate(
        chain_bests, summary, backend, config.arbiter,
        job=job, keywords=keywords, templates=templates,
        parse_retries=config.parse_retries, seed=config.seed,
    )

    pool_titles = _collect_pool([title for _, title in initials], traces)
    try:
        opt_title, pool_opt = brute_force_opt(pool_titles, job, keywords, scorer, config)
    except (NoFeasibleCandidate, *_AGENT_ERRORS):
        # unscorable pools (a failed chain's initial) forfeit the optimum
        opt_title, pool_opt = None, None
    # The arbiter picks among chain bests; if its pick is infeasible while
    # some generated title was feasible, fall back to the pool optimum.
    if not feasible(final, config).ok and opt_title is not None:
        final = opt_title

    final_vec = coverage(final, job, keywords, scorer)
    return PipelineResult(
        module_id=job.module_id,
        mode="carts",
        final=final,
        final_coverage=final_vec,
        final_feasible=feasible(final, config).ok,
        candidates=tuple(pool_titles),
        traces=tuple(traces),
        pool_opt=pool_opt,
        failed_chains=tuple(sorted(failed_chains)),
        config=config,
        seed=config.seed,
    )


def run_vanilla(
    job: ModuleJob,
    config: PipelineConfig,
    backend: AgentBackend,
    scorer: RelevanceScorer,
    *,
    templates: TemplateSet = DEFAULT_TEMPLATES,
) -> PipelineResult:
    """Single-call baseline: one generation, no keywords, no refinement.

    Coverage is still measured for the report; the keyword-overlap scorer
    uses keyword sets derived locally from item text, so the run makes
    exactly one backend call.
    """
    validate_job(job)
    scorer = _CachingScorer(scorer)  # type: ignore[assignment]
    try:
        final = generate_initial(
            job, [], config, backend,
            templates=templates, chain_id=0, seed=config.seed,
            provenance="baseline", include_keywords=False,
        )
    except _AGENT_ERRORS as exc:
        raise JobFailed(f"baseline generation failed: {exc}") from exc
    keywords = [derive_keywords(item, config.keywords_per_item) for item in job.items]
    try:
        final_vec = coverage(final, job, keywords, scorer)
    except _AGENT_ERRORS as exc:
        raise JobFailed(f"baseline scoring failed: {exc}") from exc
    try:
        _, pool_opt = brute_force_opt([final], job, keywords, scorer, config)
    except NoFeasibleCandidate:
        pool_opt = None
    return PipelineResult(
        module_id=job.module_id,
        mode="vanilla",
        final=final,
        final_coverage=final_vec,
        final_feasible=feasible(final, config).ok,
        candidates=(final,),
        traces=(),
        pool_opt=pool_opt,
        failed_chains=(),
        config=config,
        seed=config.seed,
    )
