"""Offline evaluation of engine result files.

Scores each module title against its items with a binary judge and a
token-embedding similarity, then tabulates the averages across run modes.
Consumes the engine's dataset and result files directly; no engine import.
"""

from .bertscore import (
    BertScore,
    HashedTokenEmbedder,
    PretrainedTokenEmbedder,
    bert_module_score,
    pair_score,
)
from .compare import (
    ComparisonRow,
    ComparisonTable,
    ScoreReport,
    compare,
    score_module,
    write_table,
)
from .judge import (
    JUDGE_PROMPT,
    HttpJudge,
    JudgeScore,
    ScriptedJudge,
    judge_bit,
    judge_module_score,
)
from .records import ModuleItems, ResultRecord, ScoredItem, read_modules, read_results

__version__ = "0.1.0"

__all__ = [
    "BertScore",
    "ComparisonRow",
    "ComparisonTable",
    "HashedTokenEmbedder",
    "HttpJudge",
    "JUDGE_PROMPT",
    "JudgeScore",
    "ModuleItems",
    "PretrainedTokenEmbedder",
    "ResultRecord",
    "ScoreReport",
    "ScoredItem",
    "ScriptedJudge",
    "bert_module_score",
    "compare",
    "judge_bit",
    "judge_module_score",
    "pair_score",
    "read_modules",
    "read_results",
    "score_module",
    "write_table",
]
