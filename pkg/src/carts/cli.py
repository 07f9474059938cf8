"""Command-line surface: run the pipeline, verify the bounds, lint datasets.

Exit codes: 0 success, 1 when any job failed in strict mode (or the lint
found errors), 2 on usage errors such as bad flags or a missing input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .backends import (
    DEFAULT_ENDPOINT,
    AgentBackend,
    BoundedBackend,
    HttpChatBackend,
    ScriptedBackend,
)
from .coverage import RelevanceScorer
from .dataset import dump_line, scan_jobs, write_results
from .domain import BoundParams, ModuleJob, PipelineConfig
from .errors import CartsError, InvalidTheoryParams
from .lab import SimParams, verify_corollary, verify_theorem
from .pipeline import PipelineResult, run_carts, run_vanilla
from .templates import DEFAULT_TEMPLATES, load_templates

log = logging.getLogger(__name__)

USAGE_EXIT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carts",
        description="Generate module titles for item carousels and verify "
        "the refinement-convergence bounds by simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the title pipeline over a dataset")
    run.add_argument("--dataset", required=True, help="line-delimited JSON jobs file")
    run.add_argument("--out", required=True, help="output results file")
    run.add_argument("--mode", choices=("carts", "vanilla"), default="carts")
    run.add_argument("--backend", choices=("llm", "mock"), default="mock")
    run.add_argument("--script", help="canned responses file for --backend mock")
    run.add_argument("--scorer", choices=("mock", "judge"), default="mock",
                     help="relevance scorer: keyword overlap or LLM judge")
    run.add_argument("--max-chars", type=int, default=60, metavar="K")
    run.add_argument("--max-words", type=int, default=10, metavar="W")
    run.add_argument("--keywords", type=int, default=5, metavar="L",
                     help="keywords distilled per item")
    run.add_argument("--chains", type=int, default=1, metavar="k")
    run.add_argument("--iterations", type=int, default=None, metavar="T",
                     help="refinement rounds per chain")
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--beta", type=float, default=None)
    run.add_argument("--gamma", type=float, default=None)
    run.add_argument("--epsilon", type=float, default=None)
    run.add_argument("--opt-estimate", type=int, default=None,
                     help="optimum estimate for the derived budget "
                     "(defaults to the job's item count)")
    run.add_argument("--c0-estimate", type=int, default=0,
                     help="starting-coverage estimate for the derived budget")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--concurrency", type=int, default=1,
                     help="bound on in-flight backend requests")
    run.add_argument("--templates", default=None, metavar="DIR",
                     help="directory of prompt template overrides")
    run.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    run.add_argument("--model", default="gpt-4o")
    run.add_argument("--temperature", type=float, default=0.0)
    run.add_argument("--arbiter", choices=("rule", "llm"), default="rule")
    run.add_argument("--strict", action="store_true",
                     help="any malformed line or failed job fails the run")

    sim = sub.add_parser("simulate", help="verify the convergence bounds")
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--gamma", type=float, required=True)
    sim.add_argument("--opt", type=int, required=True)
    sim.add_argument("--c0", type=int, default=0)
    sim.add_argument("--alpha", type=float, default=1.0)
    sim.add_argument("--epsilon", type=float, default=0.05)
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--verify", choices=("theorem", "corollary"), required=True)
    sim.add_argument("--generous", action="store_true",
                     help="gain Uniform{1..3} per success instead of 1")
    sim.add_argument("--dump-traces", default=None, metavar="PATH",
                     help="write per-trial coverage traces (theorem mode)")

    lint = sub.add_parser("validate", help="lint a dataset file")
    lint.add_argument("--dataset", required=True)
    return parser


def _load_script(path: str) -> list[str]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        raw = raw.get("responses")
    if not isinstance(raw, list) or not all(isinstance(r, str) for r in raw):
        raise ValueError("script file must be a JSON array of strings")
    return raw


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    theory_flags = (args.alpha, args.beta, args.gamma, args.epsilon)
    any_theory = any(value is not None for value in theory_flags)
    bound = None
    iterations = args.iterations
    if any_theory:
        if args.iterations is not None:
            raise ValueError("supply either --iterations or the bound flags, not both")
        if not all(value is not None for value in theory_flags):
            raise ValueError("bound mode needs all of --alpha --beta --gamma --epsilon")
        bound = BoundParams(
            alpha=args.alpha,
            beta=args.beta,
            gamma=args.gamma,
            epsilon=args.epsilon,
            opt_estimate=args.opt_estimate,
            c0_estimate=args.c0_estimate,
        )
    elif iterations is None:
        if args.mode == "vanilla":
            iterations = 0  # baseline never refines
        else:
            raise ValueError("carts mode needs --iterations or the bound flags")
    return PipelineConfig(
        max_chars=args.max_chars,
        max_words=args.max_words,
        keywords_per_item=args.keywords,
        chains=args.chains,
        iterations=iterations,
        bound=bound,
        backend=args.backend,
        scorer="mock" if args.scorer == "mock" else "llm_judge",
        temperature=args.temperature,
        parse_retries=2,
        seed=args.seed,
        arbiter=args.arbiter,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    dataset = Path(args.dataset)
    if not dataset.is_file():
        print(f"error: dataset file not found: {dataset}", file=sys.stderr)
        return USAGE_EXIT
    try:
        config = _build_config(args)
    except (ValueError, InvalidTheoryParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT

    templates = DEFAULT_TEMPLATES
    if args.templates:
        try:
            templates = load_templates(args.templates)
        except CartsError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_EXIT

    backend: AgentBackend
    if args.backend == "mock":
        if not args.script:
            print("error: --backend mock needs --script", file=sys.stderr)
            return USAGE_EXIT
        script_path = Path(args.script)
        if not script_path.is_file():
            print(f"error: script file not found: {script_path}", file=sys.stderr)
            return USAGE_EXIT
        try:
            backend = ScriptedBackend(_load_script(args.script))
        except (ValueError, json.JSONDecodeError) as exc:
            print(f"error: bad script file: {exc}", file=sys.stderr)
            return USAGE_EXIT
    else:
        backend = HttpChatBackend(
            endpoint=args.endpoint,
            model_name=args.model,
            temperature=args.temperature,
        )
        if args.concurrency > 1:
            backend = BoundedBackend(backend, args.concurrency)

    scorer = (
        RelevanceScorer(kind="mock_keyword_overlap")
        if config.scorer == "mock"
        else RelevanceScorer(kind="llm_judge", backend=backend,
                             parse_retries=config.parse_retries)
    )

    jobs, schema_errors = scan_jobs(dataset)
    for error in schema_errors:
        log.error("%s: %s", dataset, error)
    if not jobs and not schema_errors:
        log.warning("dataset %s contains no jobs", dataset)

    def _run_one(job: ModuleJob) -> PipelineResult:
        if args.mode == "vanilla":
            return run_vanilla(job, config, backend, scorer, templates=templates)
        return run_carts(
            job, config, backend, scorer, templates=templates,
            chain_concurrency=args.concurrency if args.backend == "llm" else 1,
        )

    results: list[PipelineResult | None] = [None] * len(jobs)

    def _worker(index: int) -> None:
        line_no, job = jobs[index]
        try:
            results[index] = _run_one(job)
        except CartsError as exc:
            log.error("job %s (line %d) failed: %s", job.module_id, line_no, exc)

    if args.backend == "llm" and args.concurrency > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=args.concurrency) as pool:
            list(pool.map(_worker, range(len(jobs))))
    else:
        for index in range(len(jobs)):
            _worker(index)

    done = [result for result in results if result is not None]
    failures = len(schema_errors) + (len(jobs) - len(done))
    write_results(done, args.out)
    log.info("wrote %d results to %s (%d failures)", len(done), args.out, failures)
    if failures and args.strict:
        return 1
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        params = SimParams(
            beta=args.beta,
            gamma=args.gamma,
            opt=args.opt,
            c0=args.c0,
            alpha=args.alpha,
            epsilon=args.epsilon,
            trials=args.trials,
            seed=args.seed,
            generous=args.generous,
        )
    except InvalidTheoryParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    if args.verify == "theorem":
        report = verify_theorem(params, keep_traces=bool(args.dump_traces))
        if args.dump_traces:
            with open(args.dump_traces, "w", encoding="utf-8") as handle:
                for trace in report.traces:
                    handle.write(json.dumps(list(trace)))
                    handle.write("\n")
    else:
        report = verify_corollary(params)
    print(dump_line(report.to_record()))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    dataset = Path(args.dataset)
    if not dataset.is_file():
        print(f"error: dataset file not found: {dataset}", file=sys.stderr)
        return USAGE_EXIT
    jobs, errors = scan_jobs(dataset)
    for error in errors:
        print(f"{dataset}:{error.line_no}: {error.reason}")
    print(f"{len(jobs)} valid jobs, {len(errors)} bad lines")
    return 1 if errors else 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    return _cmd_validate(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
