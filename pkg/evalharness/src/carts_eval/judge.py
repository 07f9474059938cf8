"""Binary relevance judging over the chat-completions wire protocol.

The judge prompt walks the model through explicit steps and demands a
bare "1" or "0"; it is a configuration asset of this harness, replaceable
per run. The HTTP client mirrors the engine's wire protocol and reads its
credential from CARTS_API_KEY.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .errors import BackendError, JudgeParseFailure, ScriptExhausted
from .records import ScoredItem

DEFAULT_ENDPOINT = "https://api.openai.com/v1"
API_KEY_ENV = "CARTS_API_KEY"

JUDGE_PROMPT = """\
You are a careful evaluator of eCommerce module titles.

Follow these steps:
Step 1: Read the module title.
Step 2: Read the item information.
Step 3: List the item's key attributes (category, product type, use case).
Step 4: Decide whether the module title accurately represents this item.

Module title:
{title}

Item:
{item_text}

After the steps, respond with exactly one character and nothing else:
1 if the title represents the item, 0 if it does not.
"""


class JudgeBackend(Protocol):
    def complete(self, prompt: str) -> str: ...


class ScriptedJudge:
    """Replays canned verdicts in order; raises when exhausted."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._next = 0
        self._lock = threading.Lock()
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.prompts.append(prompt)
            if self._next >= len(self._responses):
                raise ScriptExhausted(
                    f"judge script exhausted after {len(self._responses)} responses"
                )
            response = self._responses[self._next]
            self._next += 1
            return response


class HttpJudge:
    """POST {endpoint}/chat/completions with the engine's body shape."""

    def __init__(
        self,
        endpoint: str = DEFAULT_ENDPOINT,
        model_name: str = "gpt-4o",
        temperature: float = 0.0,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model_name = model_name
        self.temperature = temperature
        self._credential = os.environ.get(API_KEY_ENV, "")
        self._client = httpx.Client(timeout=timeout)

    def complete(self, prompt: str) -> str:
        headers = {}
        if self._credential:
            headers["Authorization"] = f"Bearer {self._credential}"
        try:
            response = self._client.post(
                f"{self.endpoint}/chat/completions",
                json={
                    "model": self.model_name,
                    "messages": [{"role": "user", "content": prompt}],
                    "temperature": self.temperature,
                },
                headers=headers,
            )
        except httpx.HTTPError as exc:
            raise BackendError(f"transport failure: {exc.__class__.__name__}") from exc
        if response.status_code // 100 != 2:
            raise BackendError(f"judge returned status {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError("malformed judge response") from exc
        return content


@dataclass(frozen=True)
class JudgeScore:
    """Per-item verdicts for one module title."""

    bits: tuple[int, ...]
    mean: float


def judge_bit(
    title: str,
    item: ScoredItem,
    backend: JudgeBackend,
    *,
    prompt: str = JUDGE_PROMPT,
    parse_retries: int = 2,
) -> int:
    """One strict binary verdict; retries re-ask the backend."""
    rendered = prompt.format(title=title, item_text=item.text())
    last = ""
    for _ in range(parse_retries + 1):
        last = backend.complete(rendered)
        verdict = last.strip()
        if verdict in ("0", "1"):
            return int(verdict)
    raise JudgeParseFailure(
        f"judge returned neither '1' nor '0' for item {item.id!r}: {last[:80]!r}"
    )


def judge_module_score(
    title: str,
    items: Sequence[ScoredItem],
    backend: JudgeBackend,
    *,
    prompt: str = JUDGE_PROMPT,
    parse_retries: int = 2,
) -> JudgeScore:
    """Mean of per-item binary verdicts for one module title."""
    if not items:
        raise ValueError("judge_module_score needs at least one item")
    bits = tuple(
        judge_bit(title, item, backend, prompt=prompt, parse_retries=parse_retries)
        for item in items
    )
    return JudgeScore(bits=bits, mean=sum(bits) / len(bits))
