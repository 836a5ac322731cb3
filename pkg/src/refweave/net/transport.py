"""HTTP client with swappable live/replay transports.

The client enforces three rules in a fixed order for every hop:
egress policy first, then the audit recorder, then the actual exchange.
A host outside the allowlist is denied even when a replay fixture for it
exists, so tests exercise the same guardrails as production.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol
from urllib.parse import urljoin, urlsplit

from ..errors import EgressDenied, FixtureMissing
from .fixtures import FixtureStore, request_key
from .recorder import RequestRecorder
from .retry import RetryPolicy, is_retryable_status

REDIRECT_STATUSES = frozenset({301, 302, 303, 307, 308})
MAX_REDIRECTS = 5


class TransportError(Exception):
    """Network-level failure: DNS, refused connection, timeout."""


class RedirectError(Exception):
    """Redirect chain exceeded the hop budget; retrying will not help."""


@dataclass(frozen=True)
class HttpRequest:
    method: str
    url: str
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes | None = None
    # Stable stand-in for the body when the raw bytes vary between runs
    # (multipart boundaries and the like); used only for fixture keying.
    replay_extra: bytes | None = None
    timeout: float = 30.0

    @property
    def host(self) -> str:
        return urlsplit(self.url).hostname or ""

    def fixture_key(self) -> str:
        return request_key(self.method, self.url, self.body, self.replay_extra)


@dataclass(frozen=True)
class HttpResponse:
    status: int
    headers: dict[str, str]
    body: bytes
    url: str
    via_hosts: tuple[str, ...] = ()
    # Key of the stored copy of this response; doubles as a provenance id.
    store_key: str | None = None

    def header(self, name: str) -> str | None:
        wanted = name.lower()
        for key, value in self.headers.items():
            if key.lower() == wanted:
                return value
        return None


class Transport(Protocol):
    def exchange(self, request: HttpRequest) -> HttpResponse:
        """One request, one response. No redirects, no retries."""
        ...


class LiveTransport:
    """Real sockets via `requests`, one hop at a time."""

    def __init__(self, max_body_bytes: int = 64 * 1024 * 1024):
        self.max_body_bytes = max_body_bytes

    def exchange(self, request: HttpRequest) -> HttpResponse:
        import requests

        try:
            raw = requests.request(
                request.method,
                request.url,
                headers=request.headers or None,
                data=request.body,
                timeout=request.timeout,
                allow_redirects=False,
                stream=True,
            )
            body = raw.raw.read(self.max_body_bytes + 1, decode_content=True)
            raw.close()
        except requests.RequestException as exc:
            raise TransportError(f"{request.method} {request.url}: {exc}") from exc
        if len(body) > self.max_body_bytes:
            raise TransportError(f"response for {request.url} exceeds {self.max_body_bytes} bytes")
        return HttpResponse(
            status=raw.status_code,
            headers=dict(raw.headers),
            body=body,
            url=request.url,
        )


class ReplayTransport:
    """Serves responses from a fixture store; the network is never touched."""

    def __init__(self, store: FixtureStore):
        self.store = store

    def exchange(self, request: HttpRequest) -> HttpResponse:
        key = request.fixture_key()
        entry = self.store.get(key)
        if entry is None:
            raise FixtureMissing(
                f"no recorded response for {request.method} {request.url} (key {key})"
            )
        body, meta = entry
        return HttpResponse(
            status=int(meta.get("status", 200)),
            headers=dict(meta.get("headers", {})),
            body=body,
            url=str(meta.get("final_url", request.url)),
            via_hosts=tuple(meta.get("via_hosts", [])),
            store_key=key,
        )


class PolitenessGate:
    """Minimum spacing between live requests to one upstream service."""

    def __init__(self, min_interval_seconds: float, sleep: Callable[[float], None] = time.sleep,
                 clock: Callable[[], float] = time.monotonic):
        self.min_interval = min_interval_seconds
        self._sleep = sleep
        self._clock = clock
        self._last: float | None = None

    def wait(self) -> None:
        now = self._clock()
        if self._last is not None:
            remaining = self.min_interval - (now - self._last)
            if remaining > 0:
                self._sleep(remaining)
                now = self._clock()
        self._last = now


class _AllowAll:
    def check(self, host: str) -> None:  # noqa: ARG002 - interface parity
        return None


class HttpClient:
    """Policy-checked, audited, retrying HTTP entry point for the engine.

    `mode` is "live" or "replay".  Live responses are archived into the
    fixture store as they arrive; replayed responses come straight from it.
    """

    def __init__(
        self,
        transport: Transport,
        store: FixtureStore,
        *,
        mode: str = "replay",
        policy=None,
        recorder: RequestRecorder | None = None,
        retry: RetryPolicy | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng=None,
    ):
        if mode not in ("live", "replay"):
            raise ValueError(f"unknown transport mode: {mode!r}")
        self.transport = transport
        self.store = store
        self.mode = mode
        self.policy = policy if policy is not None else _AllowAll()
        self.recorder = recorder if recorder is not None else RequestRecorder()
        self.retry = retry if retry is not None else RetryPolicy()
        self._sleep = sleep
        self._rng = rng

    # -- single policed hop ------------------------------------------------

    def _hop(self, request: HttpRequest) -> HttpResponse:
        host = request.host
        try:
            self.policy.check(host)
        except EgressDenied:
            self.recorder.record(request.method, request.url, request.body, allowed=False)
            raise
        self.recorder.record(request.method, request.url, request.body, allowed=True)
        return self.transport.exchange(request)

    def _follow_redirects(self, request: HttpRequest) -> HttpResponse:
        response = self._hop(request)
        hops: list[str] = []
        current = request
        for _ in range(MAX_REDIRECTS):
            if response.status not in REDIRECT_STATUSES:
                break
            location = response.header("location")
            if not location:
                break
            target = urljoin(current.url, location)
            hops.append(urlsplit(target).hostname or "")
            method = current.method
            body = current.body
            if response.status == 303 and method != "GET":
                method, body = "GET", None
            current = replace(current, method=method, url=target, body=body)
            response = self._hop(current)
        else:
            if response.status in REDIRECT_STATUSES:
                raise RedirectError(f"too many redirects for {request.url}")
        if hops and not response.via_hosts:
            response = replace(response, via_hosts=tuple(hops), url=current.url)
        return response

    # -- public API ----------------------------------------------------------

    def send(self, request: HttpRequest, retry: RetryPolicy | None = None) -> HttpResponse:
        """Send with retries on network errors, 5xx, and 429.

        Returns the final response whatever its status; 4xx other than 429
        comes back after a single attempt.  Raises TransportError when the
        network itself keeps failing, EgressDenied when policy blocks a hop,
        FixtureMissing when replaying an unrecorded request.
        """
        policy = retry if retry is not None else self.retry
        last_exc: TransportError | None = None
        response: HttpResponse | None = None
        for attempt in range(1, policy.max_attempts + 1):
            try:
                response = self._follow_redirects(request)
                last_exc = None
            except TransportError as exc:
                last_exc = exc
                response = None
            if response is not None and not is_retryable_status(response.status):
                break
            if attempt == policy.max_attempts:
                break
            self._sleep(policy.delay_seconds(attempt, self._rng))
        if response is None:
            assert last_exc is not None
            raise last_exc
        if self.mode == "live" and response.store_key is None:
            key = request.fixture_key()
            self.store.put(
                key,
                response.body,
                url=request.url,
                status=response.status,
                headers=response.headers,
                final_url=response.url,
                via_hosts=list(response.via_hosts),
            )
            response = replace(response, store_key=key)
        return response
