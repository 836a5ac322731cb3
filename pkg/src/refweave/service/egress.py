"""Host allowlist enforcement with an audit trail of denials."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from ..errors import EgressDenied
from ..net import FixtureStore
from .config import Config


@dataclass(frozen=True)
class DeniedAttempt:
    host: str
    timestamp: float


class EgressPolicy:
    def __init__(self, allowed_hosts):
        self.allowed = {h.lower() for h in allowed_hosts if h}
        self._lock = threading.Lock()
        self._denials: list[DeniedAttempt] = []

    @classmethod
    def from_config(cls, config: Config, store: FixtureStore | None = None) -> "EgressPolicy":
        hosts = config.allowed_hosts()
        # Replay mode trusts exactly what was recorded, including redirect
        # hops such as the citation formatters behind doi.org.
        if config.transport_mode == "replay" and store is not None:
            hosts |= store.hosts()
        return cls(hosts)

    def check(self, host: str) -> None:
        if (host or "").lower() in self.allowed:
            return
        attempt = DeniedAttempt(host=host, timestamp=time.time())
        with self._lock:
            self._denials.append(attempt)
        raise EgressDenied(f"host not in allowlist: {host!r}")

    def denials(self) -> list[DeniedAttempt]:
        with self._lock:
            return list(self._denials)
