"""Cross-mode comparison tables over engine result files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .bertscore import TokenEmbedder, bert_module_score
from .errors import SchemaError
from .judge import JudgeBackend, judge_module_score
from .records import ModuleItems, read_modules, read_results


@dataclass(frozen=True)
class ScoreReport:
    """Scores for one module under one run mode."""

    mode: str
    module_id: str
    judge_bits: tuple[int, ...]
    module_judge: float
    bert_per_item: tuple[float, ...]
    module_bert: float


@dataclass(frozen=True)
class ComparisonRow:
    mode: str
    modules: int
    module_judge: float  # mean over modules
    module_bert: float  # mean over modules


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    reports: tuple[ScoreReport, ...]

    def render_text(self) -> str:
        header = f"{'mode':<12} {'modules':>8} {'module_judge':>14} {'module_bert':>13}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.mode:<12} {row.modules:>8d} {row.module_judge:>14.4f} "
                f"{row.module_bert:>13.4f}"
            )
        return "\n".join(lines)

    def to_record(self) -> dict:
        return {
            "rows": [
                {
                    "mode": row.mode,
                    "modules": row.modules,
                    "module_judge": row.module_judge,
                    "module_bert": row.module_bert,
                }
                for row in self.rows
            ],
            "modules": [
                {
                    "mode": report.mode,
                    "module_id": report.module_id,
                    "judge_bits": list(report.judge_bits),
                    "module_judge": report.module_judge,
                    "bert_per_item": list(report.bert_per_item),
                    "module_bert": report.module_bert,
                }
                for report in self.reports
            ],
        }


def score_module(
    mode: str,
    title: str,
    module: ModuleItems,
    judge_backend: JudgeBackend,
    embedder: TokenEmbedder | None = None,
    parse_retries: int = 2,
) -> ScoreReport:
    judge = judge_module_score(
        title, module.items, judge_backend, parse_retries=parse_retries
    )
    bert = bert_module_score(title, [item.text() for item in module.items], embedder)
    return ScoreReport(
        mode=mode,
        module_id=module.module_id,
        judge_bits=judge.bits,
        module_judge=judge.mean,
        bert_per_item=bert.per_item,
        module_bert=bert.mean,
    )


def compare(
    dataset_path: str | Path,
    result_files: Sequence[tuple[str, str | Path]],
    judge_backend: JudgeBackend,
    embedder: TokenEmbedder | None = None,
    parse_retries: int = 2,
) -> ComparisonTable:
    """Score every mode's result file over the shared dataset.

    All result files must cover exactly the same module ids; a mismatch is
    a SchemaError naming the offending ids. Judge calls run in input order:
    file by file, module by module, item by item.
    """
    if not result_files:
        raise ValueError("compare needs at least one result file")
    modules = {module.module_id: module for module in read_modules(dataset_path)}

    per_mode: list[tuple[str, list]] = []
    id_sets: dict[str, set[str]] = {}
    for mode, path in result_files:
        results = read_results(path)
        ids = {record.module_id for record in results}
        missing = ids - set(modules)
        if missing:
            raise SchemaError(
                f"result file {path} references modules absent from the dataset: "
                f"{sorted(missing)}"
            )
        id_sets[mode] = ids
        per_mode.append((mode, results))

    reference = id_sets[per_mode[0][0]]
    for mode, ids in id_sets.items():
        if ids != reference:
            raise SchemaError(
                f"module ids differ across result files: {sorted(reference ^ ids)}"
            )

    rows = []
    reports: list[ScoreReport] = []
    for mode, results in per_mode:
        mode_reports = [
            score_module(
                mode,
                record.final_title,
                modules[record.module_id],
                judge_backend,
                embedder,
                parse_retries,
            )
            for record in results
        ]
        reports.extend(mode_reports)
        rows.append(
            ComparisonRow(
                mode=mode,
                modules=len(mode_reports),
                module_judge=sum(r.module_judge for r in mode_reports) / len(mode_reports),
                module_bert=sum(r.module_bert for r in mode_reports) / len(mode_reports),
            )
        )
    return ComparisonTable(rows=tuple(rows), reports=tuple(reports))


def write_table(table: ComparisonTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(table.to_record(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")
