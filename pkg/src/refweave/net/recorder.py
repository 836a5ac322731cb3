"""Audit log of every outbound request attempt, allowed or not."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from urllib.parse import urlsplit


@dataclass(frozen=True)
class RecordedRequest:
    method: str
    url: str
    host: str
    body: bytes
    allowed: bool
    timestamp: float

    def contains(self, needle: str) -> bool:
        """True if `needle` occurs in the URL or the decoded body."""
        if needle in self.url:
            return True
        return needle in self.body.decode("utf-8", errors="replace")


class RequestRecorder:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: list[RecordedRequest] = []

    def record(self, method: str, url: str, body: bytes | None, allowed: bool) -> None:
        entry = RecordedRequest(
            method=method.upper(),
            url=url,
            host=urlsplit(url).hostname or "",
            body=body or b"",
            allowed=allowed,
            timestamp=time.time(),
        )
        with self._lock:
            self._entries.append(entry)

    def entries(self) -> list[RecordedRequest]:
        with self._lock:
            return list(self._entries)

    def hosts_carrying(self, needle: str) -> set[str]:
        """Hosts that received (or would have received) the given text."""
        return {e.host for e in self.entries() if e.contains(needle)}

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
