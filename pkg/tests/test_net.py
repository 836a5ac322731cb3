import http.server
import random
import threading

import pytest

from refweave.errors import EgressDenied, FixtureMissing
from refweave.net import (
    FixtureStore,
    HttpClient,
    HttpRequest,
    HttpResponse,
    LiveTransport,
    PolitenessGate,
    ReplayTransport,
    RequestRecorder,
    RetryPolicy,
)
from refweave.net.fixtures import canonical_url, request_key
from refweave.net.transport import RedirectError, TransportError


class ScriptedTransport:
    """Plays back a list of (status, headers, body) tuples or exceptions."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = []

    def exchange(self, request):
        self.calls.append(request)
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        status, headers, body = item
        return HttpResponse(status=status, headers=dict(headers), body=body, url=request.url)


class DenyListPolicy:
    def __init__(self, allowed):
        self.allowed = set(allowed)

    def check(self, host):
        if host not in self.allowed:
            raise EgressDenied(f"host not allowed: {host}")


def make_client(script, tmp_path, *, mode="replay", policy=None, retry=None, **kwargs):
    transport = ScriptedTransport(script)
    store = FixtureStore(tmp_path / "store")
    sleeps = []
    client = HttpClient(
        transport,
        store,
        mode=mode,
        policy=policy,
        retry=retry or RetryPolicy(jitter_fraction=0.0),
        sleep=sleeps.append,
        **kwargs,
    )
    return client, transport, sleeps


class TestRetryPolicy:
    def test_backoff_schedule_without_jitter(self):
        policy = RetryPolicy(base_delay_ms=500, factor=2.0, max_attempts=4, jitter_fraction=0.0)
        assert [policy.delay_seconds(k) for k in (1, 2, 3)] == [0.5, 1.0, 2.0]

    def test_no_rng_means_exact_delays(self):
        policy = RetryPolicy(base_delay_ms=100, factor=3.0, jitter_fraction=0.1)
        assert policy.delay_seconds(2) == pytest.approx(0.3)

    def test_jitter_stays_within_fraction(self):
        policy = RetryPolicy(base_delay_ms=1000, factor=2.0, jitter_fraction=0.1)
        rng = random.Random(7)
        draws = [policy.delay_seconds(1, rng) for _ in range(200)]
        assert all(0.9 <= d <= 1.1 for d in draws)
        assert len({round(d, 6) for d in draws}) > 1

    def test_validation(self):
        with pytest.raises(ValueError):
            RetryPolicy(max_attempts=0)
        with pytest.raises(ValueError):
            RetryPolicy(jitter_fraction=1.0)
        with pytest.raises(ValueError):
            RetryPolicy(factor=0)
        with pytest.raises(ValueError):
            RetryPolicy().delay_seconds(0)


class TestSendRetries:
    def test_two_503s_then_success(self, tmp_path):
        script = [(503, {}, b"busy"), (503, {}, b"busy"), (200, {}, b"ok")]
        retry = RetryPolicy(base_delay_ms=500, factor=2.0, max_attempts=3, jitter_fraction=0.0)
        client, transport, sleeps = make_client(script, tmp_path, retry=retry)
        response = client.send(HttpRequest("GET", "https://api.example.org/x"))
        assert response.status == 200 and response.body == b"ok"
        assert len(transport.calls) == 3
        assert sleeps == [0.5, 1.0]

    def test_404_is_not_retried(self, tmp_path):
        client, transport, sleeps = make_client([(404, {}, b"gone")], tmp_path)
        response = client.send(HttpRequest("GET", "https://api.example.org/x"))
        assert response.status == 404
        assert len(transport.calls) == 1
        assert sleeps == []

    def test_429_is_retried(self, tmp_path):
        client, transport, _ = make_client([(429, {}, b""), (200, {}, b"ok")], tmp_path)
        assert client.send(HttpRequest("GET", "https://a.org/")).status == 200
        assert len(transport.calls) == 2

    def test_persistent_5xx_returns_final_response(self, tmp_path):
        retry = RetryPolicy(base_delay_ms=10, max_attempts=3, jitter_fraction=0.0)
        client, transport, sleeps = make_client([(503, {}, b"")] * 3, tmp_path, retry=retry)
        response = client.send(HttpRequest("GET", "https://a.org/"))
        assert response.status == 503
        assert len(transport.calls) == 3 and len(sleeps) == 2

    def test_network_errors_exhaust_to_transport_error(self, tmp_path):
        retry = RetryPolicy(base_delay_ms=10, max_attempts=3, jitter_fraction=0.0)
        script = [TransportError("boom")] * 3
        client, transport, _ = make_client(script, tmp_path, retry=retry)
        with pytest.raises(TransportError):
            client.send(HttpRequest("GET", "https://a.org/"))
        assert len(transport.calls) == 3

    def test_network_error_then_recovery(self, tmp_path):
        script = [TransportError("flaky"), (200, {}, b"ok")]
        client, _, sleeps = make_client(script, tmp_path)
        assert client.send(HttpRequest("GET", "https://a.org/")).status == 200
        assert len(sleeps) == 1

    def test_per_call_retry_override(self, tmp_path):
        script = [(503, {}, b"")] * 2
        client, transport, _ = make_client(script, tmp_path)
        once = RetryPolicy(max_attempts=1)
        assert client.send(HttpRequest("GET", "https://a.org/"), retry=once).status == 503
        assert len(transport.calls) == 1


class TestFixtureStore:
    def test_request_key_ignores_query_order(self):
        a = request_key("GET", "https://api.org/search?b=2&a=1", None)
        b = request_key("get", "https://API.org/search?a=1&b=2", None)
        assert a == b and len(a) == 24

    def test_replay_extra_overrides_body_in_key(self):
        k1 = request_key("POST", "https://g.org/p", b"--boundary1--", b"stable")
        k2 = request_key("POST", "https://g.org/p", b"--boundary2--", b"stable")
        k3 = request_key("POST", "https://g.org/p", b"--boundary1--")
        assert k1 == k2 and k1 != k3

    def test_canonical_url(self):
        assert canonical_url("HTTPS://Api.Org/a?z=1&a=2") == "https://api.org/a?a=2&z=1"

    def test_round_trip(self, tmp_path):
        store = FixtureStore(tmp_path)
        key = request_key("GET", "https://x.org/r", None)
        store.put(key, b"payload", url="https://x.org/r", status=200,
                  headers={"Content-Type": "text/plain"}, via_hosts=["mid.org"])
        body, meta = store.get(key)
        assert body == b"payload"
        assert meta["status"] == 200 and meta["via_hosts"] == ["mid.org"]
        assert store.get_body(key) == b"payload"
        assert store.get("0" * 24) is None
        assert store.hosts() == {"x.org", "mid.org"}

    def test_replay_transport_roundtrip(self, tmp_path):
        store = FixtureStore(tmp_path)
        request = HttpRequest("GET", "https://x.org/r?q=hello")
        store.put(request.fixture_key(), b"answer", url=request.url, status=200)
        response = ReplayTransport(store).exchange(request)
        assert response.status == 200 and response.body == b"answer"
        assert response.store_key == request.fixture_key()

    def test_replay_missing_fixture(self, tmp_path):
        store = FixtureStore(tmp_path)
        with pytest.raises(FixtureMissing):
            ReplayTransport(store).exchange(HttpRequest("GET", "https://x.org/unseen"))

    def test_live_mode_archives_responses(self, tmp_path):
        client, _, _ = make_client([(200, {"X-A": "1"}, b"fresh")], tmp_path, mode="live")
        request = HttpRequest("GET", "https://x.org/live")
        response = client.send(request)
        assert response.store_key == request.fixture_key()
        stored_body, meta = client.store.get(request.fixture_key())
        assert stored_body == b"fresh" and meta["status"] == 200
        # A replay client over the same store now serves the archived copy.
        replay = HttpClient(ReplayTransport(client.store), client.store, mode="replay")
        assert replay.send(request).body == b"fresh"


class TestEgressOrdering:
    def test_denied_host_never_reaches_transport(self, tmp_path):
        policy = DenyListPolicy({"api.example.org"})
        client, transport, _ = make_client([(200, {}, b"x")], tmp_path, policy=policy)
        with pytest.raises(EgressDenied):
            client.send(HttpRequest("GET", "https://evil.example.com/steal"))
        assert transport.calls == []
        denied = [e for e in client.recorder.entries() if not e.allowed]
        assert len(denied) == 1 and denied[0].host == "evil.example.com"

    def test_policy_checked_before_fixture_lookup(self, tmp_path):
        # Even with a matching fixture on disk, a disallowed host is denied.
        store = FixtureStore(tmp_path / "store")
        request = HttpRequest("GET", "https://blocked.org/data")
        store.put(request.fixture_key(), b"secret", url=request.url, status=200)
        client = HttpClient(ReplayTransport(store), store, policy=DenyListPolicy(set()))
        with pytest.raises(EgressDenied):
            client.send(request)

    def test_allowed_requests_are_recorded(self, tmp_path):
        client, _, _ = make_client([(200, {}, b"x")], tmp_path)
        client.send(HttpRequest("POST", "https://api.org/q", body=b"needle-123"))
        entries = client.recorder.entries()
        assert len(entries) == 1 and entries[0].allowed
        assert entries[0].contains("needle-123")
        assert client.recorder.hosts_carrying("needle-123") == {"api.org"}


class TestRedirects:
    def test_redirect_chain_collects_via_hosts(self, tmp_path):
        script = [
            (302, {"Location": "https://hop.org/next"}, b""),
            (200, {}, b"final"),
        ]
        client, transport, _ = make_client(script, tmp_path)
        response = client.send(HttpRequest("GET", "https://start.org/a"))
        assert response.status == 200 and response.body == b"final"
        assert response.via_hosts == ("hop.org",)
        assert response.url == "https://hop.org/next"
        assert [c.url for c in transport.calls] == ["https://start.org/a", "https://hop.org/next"]

    def test_relative_location_resolved(self, tmp_path):
        script = [(301, {"Location": "/moved"}, b""), (200, {}, b"ok")]
        client, transport, _ = make_client(script, tmp_path)
        client.send(HttpRequest("GET", "https://a.org/old"))
        assert transport.calls[1].url == "https://a.org/moved"

    def test_each_hop_is_policy_checked(self, tmp_path):
        policy = DenyListPolicy({"start.org"})
        script = [(302, {"Location": "https://forbidden.org/x"}, b"")]
        client, _, _ = make_client(script, tmp_path, policy=policy)
        with pytest.raises(EgressDenied):
            client.send(HttpRequest("GET", "https://start.org/a"))
        hosts = [(e.host, e.allowed) for e in client.recorder.entries()]
        assert hosts == [("start.org", True), ("forbidden.org", False)]

    def test_303_converts_post_to_get(self, tmp_path):
        script = [(303, {"Location": "https://a.org/result"}, b""), (200, {}, b"ok")]
        client, transport, _ = make_client(script, tmp_path)
        client.send(HttpRequest("POST", "https://a.org/form", body=b"data"))
        assert transport.calls[1].method == "GET" and transport.calls[1].body is None

    def test_too_many_redirects(self, tmp_path):
        script = [(302, {"Location": f"https://a.org/{i}"}, b"") for i in range(7)]
        client, _, _ = make_client(script, tmp_path)
        with pytest.raises(RedirectError):
            client.send(HttpRequest("GET", "https://a.org/0"))


class TestPolitenessGate:
    def test_spacing_enforced(self):
        now = [0.0]
        sleeps = []

        def sleep(seconds):
            sleeps.append(seconds)
            now[0] += seconds

        gate = PolitenessGate(3.0, sleep=sleep, clock=lambda: now[0])
        gate.wait()
        now[0] += 1.0
        gate.wait()
        assert sleeps == [pytest.approx(2.0)]
        now[0] += 5.0
        gate.wait()
        assert len(sleeps) == 1


class _Handler(http.server.BaseHTTPRequestHandler):
    def do_GET(self):
        if self.path == "/ok":
            payload = b"hello from live server"
            self.send_response(200)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)
        else:
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()

    def log_message(self, *args):
        pass


class TestLiveTransport:
    @pytest.fixture()
    def local_server(self):
        server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        yield f"http://127.0.0.1:{server.server_address[1]}"
        server.shutdown()

    def test_get_against_local_server(self, tmp_path, local_server):
        store = FixtureStore(tmp_path)
        client = HttpClient(LiveTransport(), store, mode="live")
        request = HttpRequest("GET", f"{local_server}/ok")
        response = client.send(request)
        assert response.status == 200 and response.body == b"hello from live server"
        assert store.get_body(request.fixture_key()) == b"hello from live server"

    def test_404_from_local_server(self, tmp_path, local_server):
        client = HttpClient(LiveTransport(), FixtureStore(tmp_path), mode="live")
        assert client.send(HttpRequest("GET", f"{local_server}/missing")).status == 404

    def test_connection_refused(self, tmp_path):
        client = HttpClient(LiveTransport(), FixtureStore(tmp_path), mode="live",
                            retry=RetryPolicy(max_attempts=1), sleep=lambda s: None)
        with pytest.raises(TransportError):
            client.send(HttpRequest("GET", "http://127.0.0.1:9/unreachable", timeout=2.0))
