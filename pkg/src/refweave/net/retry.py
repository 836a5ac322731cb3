"""Retry schedule for flaky upstream services."""

from __future__ import annotations

import random
from dataclasses import dataclass

# Statuses worth a second try; everything else in 4xx is a hard answer.
RETRYABLE_STATUSES = frozenset({429})


def is_retryable_status(status: int) -> bool:
    return status in RETRYABLE_STATUSES or 500 <= status <= 599


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff: the k-th failed attempt sleeps base * factor**(k-1)."""

    base_delay_ms: float = 500.0
    factor: float = 2.0
    max_attempts: int = 4
    jitter_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.base_delay_ms < 0 or self.factor <= 0:
            raise ValueError("delays must be non-negative and factor positive")
        if not 0 <= self.jitter_fraction < 1:
            raise ValueError("jitter_fraction must be in [0, 1)")

    def delay_seconds(self, failed_attempts: int, rng: random.Random | None = None) -> float:
        """Sleep to take after `failed_attempts` attempts have failed (1-based)."""
        if failed_attempts < 1:
            raise ValueError("failed_attempts is 1-based")
        delay = (self.base_delay_ms / 1000.0) * self.factor ** (failed_attempts - 1)
        if self.jitter_fraction and rng is not None:
            delay *= 1.0 + rng.uniform(-self.jitter_fraction, self.jitter_fraction)
        return delay
