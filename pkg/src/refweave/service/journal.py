"""Append-only JSONL journal with compaction and crash-safe reads."""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path
from typing import Any, Iterator


class Journal:
    def __init__(self, path: Path | str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, kind: str, payload: dict[str, Any], ts: float | None = None) -> None:
        entry = {"ts": time.time() if ts is None else ts, "kind": kind, "payload": payload}
        line = json.dumps(entry, sort_keys=True, default=str)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def entries(self) -> Iterator[dict[str, Any]]:
        """Yields well-formed entries; a torn final line is ignored."""
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except ValueError:
                    # A partial trailing write from a crash; stop here.
                    return

    def compact(self, keep: list[tuple[str, dict[str, Any]]]) -> None:
        """Atomically rewrite the journal with only the given entries."""
        tmp = self.path.with_suffix(".tmp")
        with self._lock:
            with tmp.open("w", encoding="utf-8") as handle:
                for kind, payload in keep:
                    handle.write(
                        json.dumps({"ts": time.time(), "kind": kind, "payload": payload},
                                   sort_keys=True, default=str) + "\n"
                    )
                handle.flush()
                os.fsync(handle.fileno())
            tmp.replace(self.path)
