"""Token-level embedding similarity with greedy matching (precision,
recall, F1), without baseline rescaling, so identical strings score 1.

The embedding backend is pluggable. The default hashes each token to a
deterministic unit vector, which keeps the harness hermetic and the
matching procedure fully testable; a pretrained contextual model can be
plugged in where one is available.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import groupby
from typing import Protocol, Sequence

import numpy as np

from .errors import ModelLoadError


def tokenize(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs."""
    return ["".join(g) for alnum, g in groupby(text.lower(), key=str.isalnum) if alnum]


class TokenEmbedder(Protocol):
    def embed(self, text: str) -> np.ndarray:
        """Unit-norm embedding per token, shape (n_tokens, dim)."""
        ...


class HashedTokenEmbedder:
    """Deterministic per-token unit vectors seeded from a token hash.

    Context-free: equal tokens embed equally, so self-similarity is exactly
    1 and scores are stable across platforms and runs.
    """

    def __init__(self, dim: int = 64):
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        if token not in self._cache:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
            vec = rng.standard_normal(self.dim)
            self._cache[token] = vec / np.linalg.norm(vec)
        return self._cache[token]

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self._vector(token) for token in tokens])


class PretrainedTokenEmbedder:
    """Contextual token embeddings from a transformers model.

    Loading is lazy; any failure (missing weights, no network) surfaces as
    ModelLoadError.
    """

    def __init__(self, model_name: str = "bert-base-uncased"):
        self.model_name = model_name
        self._model = None
        self._tokenizer = None

    def _load(self) -> None:
        if self._model is not None:
            return
        try:
            import torch  # noqa: F401
            from transformers import AutoModel, AutoTokenizer

            self._tokenizer = AutoTokenizer.from_pretrained(self.model_name)
            self._model = AutoModel.from_pretrained(self.model_name)
            self._model.eval()
        except Exception as exc:
            raise ModelLoadError(
                f"could not load embedding model {self.model_name!r}: {exc}"
            ) from exc

    def embed(self, text: str) -> np.ndarray:
        self._load()
        import torch

        encoded = self._tokenizer(
            text, return_tensors="pt", truncation=True, max_length=256
        )
        with torch.no_grad():
            hidden = self._model(**encoded).last_hidden_state[0]
        mask = np.ones(hidden.shape[0], dtype=bool)
        special = set(self._tokenizer.all_special_ids)
        for position, token_id in enumerate(encoded["input_ids"][0].tolist()):
            if token_id in special:
                mask[position] = False
        vectors = hidden.numpy()[mask]
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return vectors / norms


def pair_score(candidate: str, reference: str, embedder: TokenEmbedder) -> float:
    """Greedy-matching F1 over token cosine similarities, unrescaled.

    Precision averages each candidate token's best match in the reference;
    recall averages each reference token's best match in the candidate.
    Returns 0.0 when either side has no tokens.
    """
    cand = embedder.embed(candidate)
    ref = embedder.embed(reference)
    if cand.shape[0] == 0 or ref.shape[0] == 0:
        return 0.0
    sims = cand @ ref.T
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class BertScore:
    """Per-item similarity scores for one module title."""

    per_item: tuple[float, ...]
    mean: float


def bert_module_score(
    title: str,
    item_texts: Sequence[str],
    embedder: TokenEmbedder | None = None,
) -> BertScore:
    """Mean of per-item greedy-matching F1 scores for one module title."""
    if not item_texts:
        raise ValueError("bert_module_score needs at least one item text")
    if not title:
        raise ValueError("bert_module_score needs a non-empty title")
    if embedder is None:
        embedder = HashedTokenEmbedder()
    scores = tuple(pair_score(title, text, embedder) for text in item_texts)
    return BertScore(per_item=scores, mean=sum(scores) / len(scores))
