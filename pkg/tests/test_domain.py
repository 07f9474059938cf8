"""Value-type invariants and job validation."""

import pytest

from carts import BoundParams, CandidateTitle, Item, ModuleJob, PipelineConfig, validate_job
from carts.domain import RelevanceVector, char_len, word_count
from carts.errors import DuplicateItemId, EmptyItemId, EmptyJob, EmptyTitleText


def _job(items):
    return ModuleJob(module_id="m", items=tuple(items))


def test_validate_job_identity_on_valid_input():
    job = _job(
        [
            Item("a", "cat", "Title A"),
            Item("b", "cat", "Title B"),
            Item("c", "cat", "Title C"),
        ]
    )
    assert validate_job(job) is job


def test_validate_job_duplicate_id():
    job = _job([Item("a", "cat", "Title A"), Item("a", "cat", "Title B")])
    with pytest.raises(DuplicateItemId):
        validate_job(job)


def test_validate_job_empty():
    with pytest.raises(EmptyJob):
        validate_job(_job([]))


def test_validate_job_empty_title_and_id():
    with pytest.raises(EmptyTitleText):
        validate_job(_job([Item("a", "cat", "")]))
    with pytest.raises(EmptyItemId):
        validate_job(_job([Item("", "cat", "Title")]))


def test_char_len_is_code_points():
    assert char_len("naïve") == 5
    ascii_text = "plain ascii title"
    assert char_len(ascii_text) == len(ascii_text.encode("ascii"))


def test_word_count_whitespace_tokens():
    assert word_count("one two  three\tfour") == 4
    assert word_count("single") == 1


def test_candidate_title_make_derives_lengths():
    title = CandidateTitle.make("Cozy Home Picks", chain_id=3, provenance="initial")
    assert title.char_len == 15
    assert title.word_count == 3
    assert title.chain_id == 3


def test_candidate_title_rejects_linebreaks_and_mismatches():
    with pytest.raises(ValueError):
        CandidateTitle.make("two\nlines")
    with pytest.raises(ValueError):
        CandidateTitle(
            text="abc", char_len=2, word_count=1, iteration=0, chain_id=0,
            provenance="initial",
        )
    with pytest.raises(ValueError):
        CandidateTitle(
            text="abc", char_len=3, word_count=2, iteration=0, chain_id=0,
            provenance="initial",
        )
    with pytest.raises(ValueError):
        CandidateTitle.make("fine", provenance="mystery")


def test_relevance_vector_checks_sum():
    vec = RelevanceVector.from_bits({"a": 1, "b": 0, "c": 1})
    assert vec.coverage == 2
    assert vec.uncovered() == ("b",)
    with pytest.raises(ValueError):
        RelevanceVector(bits={"a": 1}, coverage=0)
    with pytest.raises(ValueError):
        RelevanceVector(bits={"a": 2}, coverage=2)


def test_relevance_vector_keys_must_match_job():
    job = _job([Item("a", "cat", "Title A"), Item("b", "cat", "Title B")])
    RelevanceVector.from_bits({"a": 1, "b": 0}).validate_for(job)
    with pytest.raises(ValueError):
        RelevanceVector.from_bits({"a": 1}).validate_for(job)
    with pytest.raises(ValueError):
        RelevanceVector.from_bits({"a": 1, "b": 0, "c": 1}).validate_for(job)


def test_config_requires_exactly_one_budget_source():
    with pytest.raises(ValueError):
        PipelineConfig()  # neither iterations nor bound
    with pytest.raises(ValueError):
        PipelineConfig(
            iterations=3,
            bound=BoundParams(alpha=1.0, beta=0.5, gamma=0.5, epsilon=0.1),
        )
    config = PipelineConfig(iterations=3)
    assert config.iterations == 3
    config = PipelineConfig(bound=BoundParams(alpha=1.0, beta=0.5, gamma=0.5, epsilon=0.1))
    assert config.bound is not None


def test_config_range_checks():
    with pytest.raises(ValueError):
        PipelineConfig(iterations=1, max_chars=0)
    with pytest.raises(ValueError):
        PipelineConfig(iterations=1, chains=0)
    with pytest.raises(ValueError):
        PipelineConfig(iterations=1, temperature=-0.1)
    with pytest.raises(ValueError):
        PipelineConfig(iterations=1, predicates=("nonexistent",))


def test_bound_params_ranges():
    from carts.errors import InvalidTheoryParams

    with pytest.raises(InvalidTheoryParams):
        BoundParams(alpha=0.0, beta=0.5, gamma=0.5, epsilon=0.1)
    with pytest.raises(InvalidTheoryParams):
        BoundParams(alpha=1.0, beta=0.0, gamma=0.5, epsilon=0.1)
    with pytest.raises(InvalidTheoryParams):
        BoundParams(alpha=1.0, beta=0.5, gamma=0.5, epsilon=1.0)
