"""Line-delimited JSON ingestion and result persistence.

Dataset schema, one job per line:
    {"module_id": str, "anchor_id": str?, "items":
        [{"id": str, "catalog": str, "title": str, "supplement": str?}]}

Result records are emitted with a fixed key order (documented in the
README) so that a rerun with identical inputs and seed is byte-identical.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator

from .agents import FeedbackReport
from .domain import (
    BoundParams,
    CandidateTitle,
    Item,
    ModuleJob,
    PipelineConfig,
    RelevanceVector,
    validate_job,
)
from .errors import InvalidJob, SchemaError
from .pipeline import PipelineResult, RefinementTrace, TraceStep

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# job codec

def job_to_record(job: ModuleJob) -> dict[str, Any]:
    record: dict[str, Any] = {"module_id": job.module_id}
    if job.anchor_id is not None:
        record["anchor_id"] = job.anchor_id
    items = []
    for item in job.items:
        entry: dict[str, Any] = {
            "id": item.id,
            "catalog": item.catalog,
            "title": item.title_text,
        }
        if item.supplement:
            entry["supplement"] = item.supplement
        items.append(entry)
    record["items"] = items
    return record


def _require(record: dict, key: str, kind: type, line_no: int) -> Any:
    if key not in record:
        raise SchemaError(line_no, f"{key} required")
    value = record[key]
    if not isinstance(value, kind):
        raise SchemaError(line_no, f"{key} must be {kind.__name__}")
    return value


def job_from_record(record: Any, line_no: int = 0) -> ModuleJob:
    if not isinstance(record, dict):
        raise SchemaError(line_no, "record must be an object")
    module_id = _require(record, "module_id", str, line_no)
    anchor_id = record.get("anchor_id")
    if anchor_id is not None and not isinstance(anchor_id, str):
        raise SchemaError(line_no, "anchor_id must be str")
    raw_items = _require(record, "items", list, line_no)
    items = []
    for raw in raw_items:
        if not isinstance(raw, dict):
            raise SchemaError(line_no, "items entries must be objects")
        supplement = raw.get("supplement", "")
        if not isinstance(supplement, str):
            raise SchemaError(line_no, "supplement must be str")
        items.append(
            Item(
                id=_require(raw, "id", str, line_no),
                catalog=_require(raw, "catalog", str, line_no),
                title_text=_require(raw, "title", str, line_no),
                supplement=supplement,
            )
        )
    job = ModuleJob(module_id=module_id, items=tuple(items), anchor_id=anchor_id)
    try:
        return validate_job(job)
    except InvalidJob as exc:
        raise SchemaError(line_no, str(exc)) from exc


def iter_job_lines(path: str | Path) -> Iterator[tuple[int, ModuleJob | SchemaError]]:
    """Yield (line_no, job-or-error) per non-empty line; never raises mid-file."""
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_no, SchemaError(line_no, f"invalid JSON: {exc.msg}")
                continue
            try:
                yield line_no, job_from_record(record, line_no)
            except SchemaError as exc:
                yield line_no, exc


def load_jobs(path: str | Path) -> list[ModuleJob]:
    """Parse every line strictly; the first malformed line raises SchemaError."""
    jobs = []
    for _, parsed in iter_job_lines(path):
        if isinstance(parsed, SchemaError):
            raise parsed
        jobs.append(parsed)
    if not jobs:
        log.warning("dataset %s contains no jobs", path)
    return jobs


def scan_jobs(path: str | Path) -> tuple[list[tuple[int, ModuleJob]], list[SchemaError]]:
    """Lenient pass: collect valid jobs and per-line errors separately."""
    jobs: list[tuple[int, ModuleJob]] = []
    errors: list[SchemaError] = []
    for line_no, parsed in iter_job_lines(path):
        if isinstance(parsed, SchemaError):
            errors.append(parsed)
        else:
            jobs.append((line_no, parsed))
    return jobs, errors


# ---------------------------------------------------------------------------
# result codec

def _title_to_record(title: CandidateTitle) -> dict[str, Any]:
    return {
        "text": title.text,
        "char_len": title.char_len,
        "word_count": title.word_count,
        "iteration": title.iteration,
        "chain_id": title.chain_id,
        "provenance": title.provenance,
        "trace": list(title.trace),
    }


def _title_from_record(record: dict[str, Any]) -> CandidateTitle:
    return CandidateTitle(
        text=record["text"],
        char_len=record["char_len"],
        word_count=record["word_count"],
        iteration=record["iteration"],
        chain_id=record["chain_id"],
        provenance=record["provenance"],
        trace=tuple(record["trace"]),
    )


def _vector_to_record(vector: RelevanceVector) -> dict[str, Any]:
    return {"bits": dict(vector.bits), "coverage": vector.coverage}


def _vector_from_record(record: dict[str, Any]) -> RelevanceVector:
    return RelevanceVector(bits=dict(record["bits"]), coverage=record["coverage"])


def _feedback_to_record(report: FeedbackReport | None) -> dict[str, Any] | None:
    if report is None:
        return None
    return {
        "bits": _vector_to_record(report.bits),
        "flagged_uncovered": list(report.flagged_uncovered),
        "critique": report.critique,
        "length_ok": report.length_ok,
    }


def _feedback_from_record(record: dict[str, Any] | None) -> FeedbackReport | None:
    if record is None:
        return None
    return FeedbackReport(
        bits=_vector_from_record(record["bits"]),
        flagged_uncovered=tuple(record["flagged_uncovered"]),
        critique=record["critique"],
        length_ok=record["length_ok"],
    )


def _trace_to_record(trace: RefinementTrace) -> dict[str, Any]:
    return {
        "chain_id": trace.chain_id,
        "degraded": trace.degraded,
        "error": trace.error,
        "best": _title_to_record(trace.best),
        "steps": [
            {
                "title": _title_to_record(step.title),
                "coverage": step.coverage,
                "feedback": _feedback_to_record(step.feedback),
                "accepted": step.accepted,
            }
            for step in trace.steps
        ],
    }


def _trace_from_record(record: dict[str, Any]) -> RefinementTrace:
    return RefinementTrace(
        chain_id=record["chain_id"],
        degraded=record["degraded"],
        error=record["error"],
        best=_title_from_record(record["best"]),
        steps=tuple(
            TraceStep(
                title=_title_from_record(step["title"]),
                coverage=step["coverage"],
                feedback=_feedback_from_record(step["feedback"]),
                accepted=step["accepted"],
            )
            for step in record["steps"]
        ),
    )


def _config_to_record(config: PipelineConfig) -> dict[str, Any]:
    bound = None
    if config.bound is not None:
        bound = {
            "alpha": config.bound.alpha,
            "beta": config.bound.beta,
            "gamma": config.bound.gamma,
            "epsilon": config.bound.epsilon,
            "opt_estimate": config.bound.opt_estimate,
            "c0_estimate": config.bound.c0_estimate,
        }
    return {
        "max_chars": config.max_chars,
        "max_words": config.max_words,
        "keywords_per_item": config.keywords_per_item,
        "chains": config.chains,
        "iterations": config.iterations,
        "bound": bound,
        "backend": config.backend,
        "scorer": config.scorer,
        "temperature": config.temperature,
        "parse_retries": config.parse_retries,
        "seed": config.seed,
        "arbiter": config.arbiter,
        "predicates": list(config.predicates),
    }


def _config_from_record(record: dict[str, Any]) -> PipelineConfig:
    bound = None
    if record.get("bound") is not None:
        raw = record["bound"]
        bound = BoundParams(
            alpha=raw["alpha"],
            beta=raw["beta"],
            gamma=raw["gamma"],
            epsilon=raw["epsilon"],
            opt_estimate=raw["opt_estimate"],
            c0_estimate=raw["c0_estimate"],
        )
    return PipelineConfig(
        max_chars=record["max_chars"],
        max_words=record["max_words"],
        keywords_per_item=record["keywords_per_item"],
        chains=record["chains"],
        iterations=record["iterations"],
        bound=bound,
        backend=record["backend"],
        scorer=record["scorer"],
        temperature=record["temperature"],
        parse_retries=record["parse_retries"],
        seed=record["seed"],
        arbiter=record["arbiter"],
        predicates=tuple(record["predicates"]),
    )


def result_to_record(result: PipelineResult) -> dict[str, Any]:
    """Result record with the documented fixed key order."""
    return {
        "module_id": result.module_id,
        "mode": result.mode,
        "seed": result.seed,
        "final": _title_to_record(result.final),
        "final_coverage": _vector_to_record(result.final_coverage),
        "final_feasible": result.final_feasible,
        "pool_opt": result.pool_opt,
        "candidates": [_title_to_record(t) for t in result.candidates],
        "traces": [_trace_to_record(t) for t in result.traces],
        "failed_chains": list(result.failed_chains),
        "config": _config_to_record(result.config),
    }


def result_from_record(record: dict[str, Any], line_no: int = 0) -> PipelineResult:
    try:
        return PipelineResult(
            module_id=record["module_id"],
            mode=record["mode"],
            final=_title_from_record(record["final"]),
            final_coverage=_vector_from_record(record["final_coverage"]),
            final_feasible=record["final_feasible"],
            candidates=tuple(_title_from_record(t) for t in record["candidates"]),
            traces=tuple(_trace_from_record(t) for t in record["traces"]),
            pool_opt=record["pool_opt"],
            failed_chains=tuple(record["failed_chains"]),
            config=_config_from_record(record["config"]),
            seed=record["seed"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(line_no, f"bad result record: {exc}") from exc


def dump_line(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_results(results: Iterable[PipelineResult], path: str | Path) -> None:
    """One record per line, fixed field order; reruns are byte-identical."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for result in results:
            handle.write(dump_line(result_to_record(result)))
            handle.write("\n")


def parse_results(path: str | Path) -> list[PipelineResult]:
    """Read a result file back into PipelineResult values (round-trip)."""
    results = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_no, f"invalid JSON: {exc.msg}") from exc
            results.append(result_from_record(record, line_no))
    return results
