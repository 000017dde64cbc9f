"""Uniform chat-completion interface; every prompt in the system flows here.

Two backends: a remote HTTP endpoint (OpenAI-style chat completions) and
a scripted mock that is a pure function of the request, byte-equal across
processes, so the whole pipeline runs deterministically offline.

When a caller passes an ``on_call`` recorder, each completion is reported
as ``(tag, request_hash, response_hash)``; the pipeline threads its trace
builder through so every call lands in the knowledge trace, in order.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import httpx

from .errors import EmptyCompletionError, RateLimitError, TransportError
from .retrying import RetryPolicy, run_with_retries


class Tag(str, Enum):
    RELEVANCE = "relevance"
    KSCORE = "kscore"
    GENERATE = "generate"
    REFINE = "refine"
    OPTIMIZE = "optimize"
    JUDGE_GROUNDING = "judge-grounding"
    JUDGE_RETENTION = "judge-retention"


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_message: str
    tag: Tag
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def canonical(self) -> str:
        return json.dumps(
            {
                "system": self.system_prompt,
                "user": self.user_message,
                "tag": self.tag.value,
                "temperature": self.temperature,
                "max_output_tokens": self.max_output_tokens,
            },
            sort_keys=True,
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class ChatResponse:
    text: str
    backend: str  # remote | mock
    latency_s: float


@dataclass(frozen=True)
class CallRecord:
    tag: str
    request_hash: str
    response_hash: str

    def to_dict(self) -> dict[str, str]:
        return {
            "tag": self.tag,
            "request_hash": self.request_hash,
            "response_hash": self.response_hash,
        }


def _hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class MockRule:
    """First matching rule wins; `pattern` is searched in the user message.

    The canned response may embed ``{user_message}`` or ``{system_prompt}``,
    replaced verbatim (useful for echo/pass-through behaviour in tests).
    """

    response: str
    tag: Tag | None = None
    pattern: str | None = None

    def matches(self, request: ChatRequest) -> bool:
        if self.tag is not None and request.tag is not self.tag:
            return False
        if self.pattern is not None and not re.search(self.pattern, request.user_message):
            return False
        return True

    def render(self, request: ChatRequest) -> str:
        text = self.response
        text = text.replace("{user_message}", request.user_message)
        text = text.replace("{system_prompt}", request.system_prompt)
        return text


class ScriptedMockBackend:
    """Deterministic canned-response backend; a default rule always exists."""

    kind = "mock"

    def __init__(self, rules: Sequence[MockRule] = (), default_response: str = "OK"):
        self.rules = list(rules) + [MockRule(response=default_response)]

    @classmethod
    def from_file(cls, path: Path) -> "ScriptedMockBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            MockRule(
                response=entry["response"],
                tag=Tag(entry["tag"]) if entry.get("tag") else None,
                pattern=entry.get("pattern"),
            )
            for entry in data.get("rules", [])
        ]
        return cls(rules, default_response=data.get("default", "OK"))

    def complete(self, request: ChatRequest) -> str:
        for rule in self.rules:
            if rule.matches(request):
                return rule.render(request)
        raise AssertionError("unreachable: constructor appends a default rule")


class RemoteChatBackend:
    """OpenAI-style ``/chat/completions`` client with bounded retries."""

    kind = "remote"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 30.0,
        retry: RetryPolicy | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self._retry = retry or RetryPolicy()
        self._sleep = sleep

    def complete(self, request: ChatRequest) -> str:
        saw_rate_limit = False

        def call() -> str:
            response = self._client.post(
                f"{self.base_url}/chat/completions",
                json={
                    "model": self.model,
                    "messages": [
                        {"role": "system", "content": request.system_prompt},
                        {"role": "user", "content": request.user_message},
                    ],
                    "temperature": request.temperature,
                    "max_tokens": request.max_output_tokens,
                },
                headers=self._headers,
            )
            if response.status_code == 429:
                nonlocal saw_rate_limit
                saw_rate_limit = True
                raise httpx.HTTPStatusError(
                    "rate limited", request=response.request, response=response
                )
            if response.status_code >= 500:
                raise httpx.HTTPStatusError(
                    f"status {response.status_code}", request=response.request,
                    response=response,
                )
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]

        def retryable(exc: Exception) -> bool:
            return isinstance(exc, (httpx.TransportError, httpx.HTTPStatusError))

        try:
            return run_with_retries(call, self._retry, retryable, sleep=self._sleep)
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            if saw_rate_limit:
                raise RateLimitError(str(exc), attempts=self._retry.attempts) from exc
            raise TransportError(str(exc), attempts=self._retry.attempts) from exc


class LlmGateway:
    """Front door for completions: validates, times, hashes, records."""

    def __init__(self, backend):
        self.backend = backend

    def complete(
        self,
        request: ChatRequest,
        on_call: Callable[[CallRecord], None] | None = None,
    ) -> ChatResponse:
        if not request.system_prompt.strip():
            raise ValueError("system_prompt must not be empty")
        if not request.user_message.strip():
            raise ValueError("user_message must not be empty")
        started = time.monotonic()
        text = self.backend.complete(request)
        latency = time.monotonic() - started
        if not text.strip():
            raise EmptyCompletionError(f"backend returned empty completion for tag {request.tag.value}")
        if on_call is not None:
            on_call(CallRecord(request.tag.value, _hash(request.canonical()), _hash(text)))
        return ChatResponse(text=text, backend=self.backend.kind, latency_s=latency)
