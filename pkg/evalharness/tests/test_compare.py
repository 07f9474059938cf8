"""Comparison tables over the committed engine fixture files."""

import json

import pytest

from carts_eval import HashedTokenEmbedder, ScriptedJudge, compare, write_table
from carts_eval.cli import main
from carts_eval.errors import SchemaError

EMBEDDER = HashedTokenEmbedder()


def test_compare_fixture_two_rows(data_dir):
    # hand-scored: carts covers all three items, vanilla only the first
    judge = ScriptedJudge(["1", "1", "1", "1", "0", "0"])
    table = compare(
        data_dir / "fixture_jobs.jsonl",
        [
            ("carts", data_dir / "golden_carts.jsonl"),
            ("vanilla", data_dir / "golden_vanilla.jsonl"),
        ],
        judge,
        EMBEDDER,
    )
    assert [row.mode for row in table.rows] == ["carts", "vanilla"]
    carts_row, vanilla_row = table.rows
    assert carts_row.module_judge == 1.0
    assert vanilla_row.module_judge == pytest.approx(1 / 3)
    assert carts_row.module_judge >= vanilla_row.module_judge
    assert carts_row.modules == vanilla_row.modules == 1
    assert 0.0 <= carts_row.module_bert <= 1.0


def test_compare_single_file_one_row(data_dir):
    judge = ScriptedJudge(["1", "0", "1"])
    table = compare(
        data_dir / "fixture_jobs.jsonl",
        [("carts", data_dir / "golden_carts.jsonl")],
        judge,
        EMBEDDER,
    )
    assert len(table.rows) == 1
    assert table.rows[0].module_judge == pytest.approx(2 / 3)
    assert table.reports[0].judge_bits == (1, 0, 1)


def test_compare_mismatched_module_ids(data_dir, tmp_path):
    other = tmp_path / "other.jsonl"
    line = json.loads((data_dir / "golden_vanilla.jsonl").read_text())
    line["module_id"] = "m-999"
    dataset_line = json.loads((data_dir / "fixture_jobs.jsonl").read_text())
    dataset_line["module_id"] = "m-999"
    dataset = tmp_path / "dataset.jsonl"
    with open(dataset, "w") as handle:
        handle.write(json.dumps(json.loads((data_dir / "fixture_jobs.jsonl").read_text())) + "\n")
        handle.write(json.dumps(dataset_line) + "\n")
    other.write_text(json.dumps(line) + "\n")
    with pytest.raises(SchemaError) as info:
        compare(
            dataset,
            [
                ("carts", data_dir / "golden_carts.jsonl"),
                ("vanilla", other),
            ],
            ScriptedJudge(["1"] * 6),
            EMBEDDER,
        )
    assert "m-999" in str(info.value) or "m-001" in str(info.value)


def test_compare_unknown_module_in_results(data_dir, tmp_path):
    rogue = tmp_path / "rogue.jsonl"
    line = json.loads((data_dir / "golden_carts.jsonl").read_text())
    line["module_id"] = "m-unknown"
    rogue.write_text(json.dumps(line) + "\n")
    with pytest.raises(SchemaError) as info:
        compare(
            data_dir / "fixture_jobs.jsonl",
            [("carts", rogue)],
            ScriptedJudge(["1"] * 3),
            EMBEDDER,
        )
    assert "m-unknown" in str(info.value)


def test_table_render_and_record(data_dir):
    judge = ScriptedJudge(["1", "1", "1"])
    table = compare(
        data_dir / "fixture_jobs.jsonl",
        [("carts", data_dir / "golden_carts.jsonl")],
        judge,
        EMBEDDER,
    )
    text = table.render_text()
    assert "module_judge" in text.splitlines()[0]
    assert "carts" in text
    record = table.to_record()
    assert record["rows"][0]["module_judge"] == 1.0
    assert record["modules"][0]["module_id"] == "m-001"


def test_write_table(tmp_path, data_dir):
    judge = ScriptedJudge(["1", "1", "1"])
    table = compare(
        data_dir / "fixture_jobs.jsonl",
        [("carts", data_dir / "golden_carts.jsonl")],
        judge,
        EMBEDDER,
    )
    out = tmp_path / "table.json"
    write_table(table, out)
    assert json.loads(out.read_text())["rows"][0]["mode"] == "carts"


def test_cli_compare(tmp_path, data_dir, capsys):
    script = tmp_path / "judge.json"
    script.write_text(json.dumps(["1", "1", "1", "1", "0", "0"]))
    out = tmp_path / "table.json"
    code = main(
        [
            "compare",
            "--dataset", str(data_dir / "fixture_jobs.jsonl"),
            "--results", f"carts={data_dir / 'golden_carts.jsonl'}",
            "--results", f"vanilla={data_dir / 'golden_vanilla.jsonl'}",
            "--judge-script", str(script),
            "--out", str(out),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "carts" in printed and "vanilla" in printed
    record = json.loads(out.read_text())
    assert len(record["rows"]) == 2


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["compare", "--dataset", "x", "--results", "bad-spec",
                 "--out", str(tmp_path / "o")]) == 2
    assert main([]) == 2
