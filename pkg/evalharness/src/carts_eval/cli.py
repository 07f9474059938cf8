"""Command-line surface: compare engine result files across run modes."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bertscore import HashedTokenEmbedder, PretrainedTokenEmbedder
from .compare import compare, write_table
from .errors import EvalError
from .judge import DEFAULT_ENDPOINT, HttpJudge, ScriptedJudge

USAGE_EXIT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carts-eval",
        description="Score engine result files with judge and embedding metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cmp_parser = sub.add_parser("compare", help="tabulate scores across run modes")
    cmp_parser.add_argument("--dataset", required=True, help="the engine's jobs file")
    cmp_parser.add_argument(
        "--results", action="append", required=True, metavar="MODE=PATH",
        help="result file labelled with its run mode; repeatable",
    )
    cmp_parser.add_argument("--out", required=True, help="machine-readable table file")
    cmp_parser.add_argument("--judge-script", default=None,
                            help="JSON array of canned judge verdicts")
    cmp_parser.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    cmp_parser.add_argument("--model", default="gpt-4o")
    cmp_parser.add_argument("--embedder", choices=("hashed", "pretrained"),
                            default="hashed")
    cmp_parser.add_argument("--embedding-model", default="bert-base-uncased")
    return parser


def _cmd_compare(args: argparse.Namespace) -> int:
    result_files = []
    for spec in args.results:
        mode, sep, path = spec.partition("=")
        if not sep or not mode or not path:
            print(f"error: --results expects MODE=PATH, got {spec!r}", file=sys.stderr)
            return USAGE_EXIT
        if not Path(path).is_file():
            print(f"error: result file not found: {path}", file=sys.stderr)
            return USAGE_EXIT
        result_files.append((mode, path))
    if not Path(args.dataset).is_file():
        print(f"error: dataset file not found: {args.dataset}", file=sys.stderr)
        return USAGE_EXIT

    if args.judge_script:
        try:
            responses = json.loads(Path(args.judge_script).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: bad judge script: {exc}", file=sys.stderr)
            return USAGE_EXIT
        judge = ScriptedJudge(responses)
    else:
        judge = HttpJudge(endpoint=args.endpoint, model_name=args.model)

    embedder = (
        HashedTokenEmbedder()
        if args.embedder == "hashed"
        else PretrainedTokenEmbedder(args.embedding_model)
    )

    try:
        table = compare(args.dataset, result_files, judge, embedder)
    except EvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_table(table, args.out)
    print(table.render_text())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return _cmd_compare(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
