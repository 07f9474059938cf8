"""Agent backends: an OpenAI-style chat endpoint and a scripted replayer.

Every agent role funnels through ``AgentBackend.complete``. The scripted
backend makes whole runs bit-reproducible; the HTTP backend speaks the
chat-completions wire protocol and reads its credential from the
CARTS_API_KEY environment variable (never logged, never echoed).
"""

from __future__ import annotations

import hashlib
import os
import threading
from typing import Protocol, Sequence

import httpx

from .errors import BackendError, ScriptExhausted

DEFAULT_ENDPOINT = "https://api.openai.com/v1"
API_KEY_ENV = "CARTS_API_KEY"


class AgentBackend(Protocol):
    """Anything that can turn one prompt into one text completion."""

    def complete(self, prompt: str, seed: int | None = None) -> str: ...


def derive_seed(seed: int, stream: int) -> int:
    """Stable 63-bit sub-seed for an independent stream (e.g. one chain)."""
    digest = hashlib.sha256(f"{seed}:{stream}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class ScriptedBackend:
    """Replays canned responses in order; raises when the script runs out.

    Replay is serialized internally, so concurrent callers are safe, but
    response assignment then depends on arrival order; run chains
    sequentially when byte-reproducibility matters.
    """

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._next = 0
        self._lock = threading.Lock()
        self.prompts: list[str] = []  # transcript, handy in tests

    def __len__(self) -> int:
        return len(self._responses)

    @property
    def remaining(self) -> int:
        return len(self._responses) - self._next

    def complete(self, prompt: str, seed: int | None = None) -> str:
        with self._lock:
            self.prompts.append(prompt)
            if self._next >= len(self._responses):
                raise ScriptExhausted(
                    f"script exhausted after {len(self._responses)} responses"
                )
            response = self._responses[self._next]
            self._next += 1
            return response


class HttpChatBackend:
    """Chat-completions client: POST {endpoint}/chat/completions.

    Body: {"model": ..., "messages": [{"role": "user", "content": prompt}],
    "temperature": ...} plus a "seed" field when one is supplied. The agent
    text is read from choices[0].message.content.
    """

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

    def __repr__(self) -> str:  # credential deliberately absent
        return (
            f"HttpChatBackend(endpoint={self.endpoint!r}, "
            f"model_name={self.model_name!r}, temperature={self.temperature})"
        )

    def complete(self, prompt: str, seed: int | None = None) -> str:
        body: dict = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        if seed is not None:
            body["seed"] = seed
        headers = {}
        if self._credential:
            headers["Authorization"] = f"Bearer {self._credential}"
        try:
            response = self._client.post(
                f"{self.endpoint}/chat/completions", json=body, headers=headers
            )
        except httpx.HTTPError as exc:
            raise BackendError(f"transport failure: {exc.__class__.__name__}") from exc
        if response.status_code // 100 != 2:
            raise BackendError(
                f"backend returned status {response.status_code}: "
                f"{response.text[:200]}"
            )
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError("malformed completion response") from exc
        if not isinstance(content, str):
            raise BackendError("completion content is not text")
        return content

    def close(self) -> None:
        self._client.close()


class BoundedBackend:
    """Caps in-flight requests to an inner backend with a shared semaphore."""

    def __init__(self, inner: AgentBackend, max_inflight: int):
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self._inner = inner
        self._semaphore = threading.Semaphore(max_inflight)

    def complete(self, prompt: str, seed: int | None = None) -> str:
        with self._semaphore:
            return self._inner.complete(prompt, seed=seed)
