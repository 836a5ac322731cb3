from .transport import (
    HttpClient,
    HttpRequest,
    HttpResponse,
    LiveTransport,
    PolitenessGate,
    ReplayTransport,
    TransportError,
)
from .fixtures import FixtureStore, canonical_url, request_key
from .recorder import RecordedRequest, RequestRecorder
from .retry import RetryPolicy

__all__ = [
    "HttpClient",
    "HttpRequest",
    "HttpResponse",
    "LiveTransport",
    "ReplayTransport",
    "PolitenessGate",
    "TransportError",
    "FixtureStore",
    "canonical_url",
    "request_key",
    "RequestRecorder",
    "RecordedRequest",
    "RetryPolicy",
]
