"""Scripted replay and the chat-completions wire client."""

import json
import threading

import httpx
import pytest

from carts import HttpChatBackend, ScriptedBackend, derive_seed
from carts.backends import API_KEY_ENV, BoundedBackend
from carts.errors import BackendError, ScriptExhausted


def test_scripted_replays_in_order_then_raises():
    backend = ScriptedBackend(["one", "two"])
    assert backend.complete("p1") == "one"
    assert backend.complete("p2") == "two"
    with pytest.raises(ScriptExhausted):
        backend.complete("p3")
    assert backend.prompts == ["p1", "p2", "p3"]


def test_scripted_serializes_concurrent_replay():
    backend = ScriptedBackend([str(n) for n in range(200)])
    seen = []
    lock = threading.Lock()

    def worker():
        for _ in range(50):
            value = backend.complete("x")
            with lock:
                seen.append(value)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(seen, key=int) == [str(n) for n in range(200)]


def test_derive_seed_stable_and_distinct():
    assert derive_seed(7, 0) == derive_seed(7, 0)
    assert derive_seed(7, 0) != derive_seed(7, 1)
    assert derive_seed(7, 0) != derive_seed(8, 0)
    assert 0 <= derive_seed(7, 3) < 2**63


def _http_backend(handler, monkeypatch, **kwargs):
    monkeypatch.setenv(API_KEY_ENV, "sk-secret-credential")
    backend = HttpChatBackend(endpoint="https://llm.example/v1", **kwargs)
    backend._client = httpx.Client(transport=httpx.MockTransport(handler))
    return backend


def test_http_backend_wire_format(monkeypatch):
    captured = {}

    def handler(request: httpx.Request) -> httpx.Response:
        captured["url"] = str(request.url)
        captured["auth"] = request.headers.get("authorization")
        captured["body"] = json.loads(request.content)
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "title: Fine Picks"}}]}
        )

    backend = _http_backend(handler, monkeypatch, model_name="m-test", temperature=0.4)
    text = backend.complete("the prompt", seed=99)
    assert text == "title: Fine Picks"
    assert captured["url"] == "https://llm.example/v1/chat/completions"
    assert captured["auth"] == "Bearer sk-secret-credential"
    assert captured["body"] == {
        "model": "m-test",
        "messages": [{"role": "user", "content": "the prompt"}],
        "temperature": 0.4,
        "seed": 99,
    }


def test_http_backend_omits_seed_when_absent(monkeypatch):
    bodies = []

    def handler(request: httpx.Request) -> httpx.Response:
        bodies.append(json.loads(request.content))
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    backend = _http_backend(handler, monkeypatch)
    backend.complete("p")
    assert "seed" not in bodies[0]


def test_http_backend_error_statuses_and_shapes(monkeypatch):
    def bad_status(request):
        return httpx.Response(500, text="boom")

    backend = _http_backend(bad_status, monkeypatch)
    with pytest.raises(BackendError):
        backend.complete("p")

    def bad_shape(request):
        return httpx.Response(200, json={"nope": []})

    backend = _http_backend(bad_shape, monkeypatch)
    with pytest.raises(BackendError):
        backend.complete("p")


def test_http_backend_never_echoes_credential(monkeypatch):
    def bad_status(request):
        return httpx.Response(403, text="denied")

    backend = _http_backend(bad_status, monkeypatch)
    assert "sk-secret-credential" not in repr(backend)
    try:
        backend.complete("p")
    except BackendError as exc:
        assert "sk-secret-credential" not in str(exc)


def test_bounded_backend_passthrough():
    inner = ScriptedBackend(["a", "b"])
    bounded = BoundedBackend(inner, max_inflight=2)
    assert bounded.complete("p") == "a"
    assert bounded.complete("p") == "b"
    with pytest.raises(ValueError):
        BoundedBackend(inner, max_inflight=0)


def test_bounded_backend_limits_inflight_requests():
    import time

    class Gauge:
        def __init__(self):
            self.current = 0
            self.peak = 0
            self.lock = threading.Lock()

        def complete(self, prompt, seed=None):
            with self.lock:
                self.current += 1
                self.peak = max(self.peak, self.current)
            time.sleep(0.005)
            with self.lock:
                self.current -= 1
            return "ok"

    gauge = Gauge()
    bounded = BoundedBackend(gauge, max_inflight=3)
    threads = [
        threading.Thread(target=lambda: [bounded.complete("p") for _ in range(5)])
        for _ in range(8)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert gauge.peak <= 3
