"""Bounded exponential-backoff retry used by the remote backends."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class RetryPolicy:
    """At most `attempts` tries; sleep base_delay * 2**i between them."""

    attempts: int = 3
    base_delay: float = 0.25

    def delays(self) -> list[float]:
        return [self.base_delay * (2 ** i) for i in range(self.attempts - 1)]


def run_with_retries(
    fn: Callable[[], T],
    policy: RetryPolicy,
    retryable: Callable[[Exception], bool],
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Call `fn` until it succeeds or the retry budget runs out.

    Non-retryable exceptions propagate immediately; the last retryable
    exception is re-raised once all attempts are spent.
    """
    last: Exception | None = None
    for attempt in range(policy.attempts):
        try:
            return fn()
        except Exception as exc:  # noqa: BLE001 - classification is the caller's
            if not retryable(exc):
                raise
            last = exc
            if attempt < policy.attempts - 1:
                sleep(policy.base_delay * (2 ** attempt))
    assert last is not None
    raise last
