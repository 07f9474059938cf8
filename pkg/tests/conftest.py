"""Shared fixtures: the scripted speaker-carousel job and its canned agents."""

import json
from pathlib import Path

import pytest

from carts import Item, ModuleJob, PipelineConfig, RelevanceScorer, ScriptedBackend

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def fixture_job() -> ModuleJob:
    return ModuleJob(
        module_id="m-001",
        anchor_id="sku-1",
        items=(
            Item(
                id="sku-1",
                catalog="Electronics/Audio/Portable Speakers",
                title_text="JBL Flip 6 Portable Bluetooth Speaker",
                supplement="Waterproof speaker for outdoor use",
            ),
            Item(
                id="sku-2",
                catalog="Electronics/Audio/Portable Speakers",
                title_text="Sony SRS-XB100 Wireless Speaker",
                supplement="Party lights and extra bass",
            ),
            Item(
                id="sku-3",
                catalog="Electronics/Audio/Portable Speakers",
                title_text="Bose SoundLink Micro",
            ),
        ),
    )


def load_script(name: str) -> list[str]:
    return json.loads((DATA_DIR / name).read_text(encoding="utf-8"))


@pytest.fixture
def carts_script() -> list[str]:
    return load_script("fixture_script.json")


@pytest.fixture
def carts_backend(carts_script) -> ScriptedBackend:
    return ScriptedBackend(carts_script)


@pytest.fixture
def mock_scorer() -> RelevanceScorer:
    return RelevanceScorer(kind="mock_keyword_overlap")


@pytest.fixture
def fixture_config() -> PipelineConfig:
    return PipelineConfig(chains=2, iterations=2, seed=7)
