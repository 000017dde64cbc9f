from __future__ import annotations

import socket
import threading
import time

import httpx
import pytest

from tmkqa.errors import EmptyCompletionError, RateLimitError, TransportError
from tmkqa.gateway import (
    ChatRequest,
    LlmGateway,
    MockRule,
    RemoteChatBackend,
    ScriptedMockBackend,
    Tag,
)
from tmkqa.retrying import RetryPolicy


def _request(tag=Tag.KSCORE, user="How many?", system="grade the question"):
    return ChatRequest(system_prompt=system, user_message=user, tag=tag)


def test_scripted_rule_matches_by_tag():
    backend = ScriptedMockBackend([MockRule(response="2", tag=Tag.KSCORE)])
    gateway = LlmGateway(backend)
    assert gateway.complete(_request()).text == "2"
    assert gateway.complete(_request(tag=Tag.GENERATE)).text == "OK"  # default rule


def test_first_matching_rule_wins():
    backend = ScriptedMockBackend([
        MockRule(response="first", tag=Tag.KSCORE, pattern="many"),
        MockRule(response="second", tag=Tag.KSCORE),
    ])
    assert LlmGateway(backend).complete(_request()).text == "first"


def test_mock_purity():
    backend = ScriptedMockBackend([MockRule(response="2", tag=Tag.KSCORE)])
    gateway = LlmGateway(backend)
    first = gateway.complete(_request())
    second = gateway.complete(_request())
    assert first.text == second.text
    assert first.backend == second.backend == "mock"


def test_echo_placeholder():
    backend = ScriptedMockBackend([MockRule(response="echo: {user_message}")])
    assert LlmGateway(backend).complete(_request(user="ping")).text == "echo: ping"


def test_empty_prompts_rejected():
    gateway = LlmGateway(ScriptedMockBackend())
    with pytest.raises(ValueError):
        gateway.complete(_request(user="  "))
    with pytest.raises(ValueError):
        gateway.complete(_request(system=""))


def test_empty_completion_is_typed_error():
    gateway = LlmGateway(ScriptedMockBackend(default_response="   "))
    with pytest.raises(EmptyCompletionError):
        gateway.complete(_request())


def test_calls_recorded_in_order():
    gateway = LlmGateway(ScriptedMockBackend([MockRule(response="2", tag=Tag.KSCORE)]))
    records = []
    gateway.complete(_request(), on_call=records.append)
    gateway.complete(_request(tag=Tag.GENERATE), on_call=records.append)
    assert [r.tag for r in records] == ["kscore", "generate"]
    assert all(len(r.request_hash) == 64 for r in records)
    # Byte-equal requests hash identically across calls.
    gateway.complete(_request(), on_call=records.append)
    assert records[0].request_hash == records[2].request_hash
    assert records[0].response_hash == records[2].response_hash


def test_mock_loads_from_fixture_file(default_mock_backend):
    gateway = LlmGateway(default_mock_backend)
    text = gateway.complete(_request(tag=Tag.KSCORE, user="What is ED?")).text
    assert text == "1"
    text = gateway.complete(
        _request(tag=Tag.KSCORE, user="Explain in great detail your match making process.")
    ).text
    assert text == "4"


# --- remote backend -----------------------------------------------------------


def _backend_with(handler, attempts=3, base_delay=0.0):
    return RemoteChatBackend(
        base_url="http://chat.test/v1",
        model="m",
        client=httpx.Client(transport=httpx.MockTransport(handler)),
        retry=RetryPolicy(attempts=attempts, base_delay=base_delay),
        sleep=lambda s: None,
    )


def test_remote_backend_success():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"choices": [{"message": {"content": "hi"}}]})

    assert _backend_with(handler).complete(_request()) == "hi"


def test_remote_retries_then_succeeds():
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(500)
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    assert _backend_with(handler).complete(_request()) == "ok"
    assert len(calls) == 3


def test_rate_limit_distinct_error():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(429)

    with pytest.raises(RateLimitError):
        _backend_with(handler).complete(_request())


def test_unreachable_backend_fails_after_three_bounded_attempts():
    # Black-hole endpoint: accepts connections, never answers.
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.bind(("127.0.0.1", 0))
    server.listen(5)
    port = server.getsockname()[1]
    stop = threading.Event()

    def hold_connections():
        server.settimeout(0.05)
        held = []
        while not stop.is_set():
            try:
                conn, _ = server.accept()
                held.append(conn)
            except socket.timeout:
                continue
        for conn in held:
            conn.close()

    holder = threading.Thread(target=hold_connections, daemon=True)
    holder.start()
    slept: list[float] = []
    try:
        backend = RemoteChatBackend(
            base_url=f"http://127.0.0.1:{port}/v1",
            model="m",
            timeout=0.15,
            retry=RetryPolicy(attempts=3, base_delay=0.05),
            sleep=slept.append,
        )
        started = time.monotonic()
        with pytest.raises(TransportError) as exc_info:
            backend.complete(_request())
        elapsed = time.monotonic() - started
        assert exc_info.value.attempts == 3
        assert slept == [0.05, 0.1]  # exponential schedule, bounded
        assert elapsed < 3.0  # 3 x timeout plus overhead, never unbounded
    finally:
        stop.set()
        holder.join(timeout=1.0)
        server.close()
