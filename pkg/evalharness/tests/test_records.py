"""Byte-level readers for the engine's files."""

import pytest

from carts_eval import read_modules, read_results
from carts_eval.errors import SchemaError
from carts_eval.records import ScoredItem


def test_read_modules_from_fixture(data_dir):
    modules = read_modules(data_dir / "fixture_jobs.jsonl")
    assert len(modules) == 1
    module = modules[0]
    assert module.module_id == "m-001"
    assert [item.id for item in module.items] == ["sku-1", "sku-2", "sku-3"]


def test_item_text_concatenation():
    item = ScoredItem(id="a", catalog="Cat/Sub", title="Name", supplement="Extra")
    assert item.text() == "Cat/Sub | Name | Extra"
    bare = ScoredItem(id="b", catalog="Cat", title="Name")
    assert bare.text() == "Cat | Name"


def test_read_results_from_goldens(data_dir):
    carts = read_results(data_dir / "golden_carts.jsonl")
    assert len(carts) == 1
    assert carts[0].module_id == "m-001"
    assert carts[0].mode == "carts"
    assert carts[0].final_title == "Portable Party Speaker Picks, Bose to Sony"

    vanilla = read_results(data_dir / "golden_vanilla.jsonl")
    assert vanilla[0].mode == "vanilla"
    assert vanilla[0].final_title == "Great Audio Picks"


def test_read_results_rejects_junk(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text("not json\n")
    with pytest.raises(SchemaError):
        read_results(path)
    path.write_text('{"module_id": "m"}\n')
    with pytest.raises(SchemaError):
        read_results(path)


def test_read_modules_requires_items(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"module_id": "m", "items": []}\n')
    with pytest.raises(SchemaError):
        read_modules(path)
