"""Content-addressed store for raw HTTP response bytes.

Every response the engine ever parses is kept here, keyed by a digest of the
request that produced it.  The same store backs offline replay and the
provenance trail: a candidate reference can always be traced back to the
stored bytes it was parsed from.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit


def canonical_url(url: str) -> str:
    """Stable form of a URL: lowercased scheme/host, sorted query pairs."""
    parts = urlsplit(url)
    query = urlencode(sorted(parse_qsl(parts.query, keep_blank_values=True)))
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), parts.path, query, ""))


def request_key(method: str, url: str, body: bytes | None, replay_extra: bytes | None = None) -> str:
    """24-hex-char key identifying one logical request.

    POST bodies that are not byte-stable (multipart boundaries, timestamps)
    pass `replay_extra` as the stable stand-in for the body digest.
    """
    material = replay_extra if replay_extra is not None else (body or b"")
    body_digest = hashlib.sha256(material).hexdigest()
    raw = f"{method.upper()}|{canonical_url(url)}|{body_digest}"
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:24]


class FixtureStore:
    """Directory of `<key>.bin` payloads with `<key>.json` metadata sidecars."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _bin(self, key: str) -> Path:
        return self.root / f"{key}.bin"

    def _meta(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def has(self, key: str) -> bool:
        return self._bin(key).exists()

    def put(
        self,
        key: str,
        body: bytes,
        *,
        url: str,
        status: int,
        headers: dict[str, str] | None = None,
        final_url: str | None = None,
        via_hosts: list[str] | None = None,
        recorded_at: float | None = None,
    ) -> str:
        meta = {
            "url": url,
            "final_url": final_url or url,
            "status": status,
            "headers": dict(headers or {}),
            "via_hosts": list(via_hosts or []),
            "recorded_at": time.time() if recorded_at is None else recorded_at,
        }
        self._bin(key).write_bytes(body)
        self._meta(key).write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
        return key

    def get(self, key: str) -> tuple[bytes, dict[str, Any]] | None:
        path = self._bin(key)
        if not path.exists():
            return None
        body = path.read_bytes()
        meta_path = self._meta(key)
        meta: dict[str, Any] = {}
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return body, meta

    def get_body(self, key: str) -> bytes | None:
        entry = self.get(key)
        return entry[0] if entry else None

    def keys(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.bin"))

    def hosts(self) -> set[str]:
        """Every host named in stored metadata, including redirect hops."""
        found: set[str] = set()
        for path in self.root.glob("*.json"):
            meta = json.loads(path.read_text(encoding="utf-8"))
            for url in (meta.get("url"), meta.get("final_url")):
                if url:
                    host = urlsplit(url).hostname
                    if host:
                        found.add(host)
            for host in meta.get("via_hosts", []):
                found.add(host)
        return found
