"""Search client for the bioRxiv and medRxiv preprint servers.

Neither server exposes a first-party full-text search API, so the query
backend is pluggable.  DetailsBackend speaks the servers' own JSON shape
against recorded fixtures; CrossrefBackend queries the Crossref works API
live, filtered to the servers' DOI prefix.
"""

from __future__ import annotations

import json
import re
from datetime import date
from typing import Protocol
from urllib.parse import quote, urlencode

from ..errors import RepoUnavailable, ResponseParseError
from ..net import HttpClient, HttpRequest
from ..net.transport import TransportError
from ..query import SearchQuery
from .base import BIORXIV_DOI_PREFIX, PaperRecord

SERVERS = ("biorxiv", "medrxiv")

_JATS_TAG_RE = re.compile(r"<[^>]+>")


def content_pdf_url(server: str, doi: str) -> str:
    return f"https://www.{server}.org/content/{doi}v1.full.pdf"


def _parse_date(raw: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise ResponseParseError(f"bad date {raw!r}") from exc


class SearchBackend(Protocol):
    def build_url(self, server: str, query_string: str, limit: int) -> str: ...

    def parse(self, body: bytes, server: str, provenance_id: str, limit: int) -> list[PaperRecord]: ...


class DetailsBackend:
    """JSON in the servers' own details shape: {"collection": [...]}."""

    def build_url(self, server: str, query_string: str, limit: int) -> str:
        return f"https://api.biorxiv.org/search/{server}/{quote(query_string)}/{limit}"

    def parse(self, body: bytes, server: str, provenance_id: str, limit: int) -> list[PaperRecord]:
        try:
            payload = json.loads(body)
            collection = payload["collection"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ResponseParseError(f"bad {server} payload: {exc}") from exc
        records = []
        for item in collection[:limit]:
            try:
                doi = item["doi"]
                title = " ".join(str(item["title"]).split())
                authors = tuple(a.strip() for a in str(item.get("authors", "")).split(";") if a.strip())
                published = _parse_date(str(item["date"]))
            except KeyError as exc:
                raise ResponseParseError(f"{server} item missing {exc}") from exc
            records.append(
                PaperRecord(
                    repo=server,
                    native_id=doi,
                    title=title,
                    authors=authors,
                    abstract=" ".join(str(item.get("abstract", "")).split()),
                    pdf_url=item.get("pdf_url") or content_pdf_url(server, doi),
                    published=published,
                    provenance_id=provenance_id,
                )
            )
        return records


class CrossrefBackend:
    """Crossref works API restricted to the 10.1101 posted-content corpus."""

    def build_url(self, server: str, query_string: str, limit: int) -> str:  # noqa: ARG002
        params = urlencode(
            [
                ("query.bibliographic", query_string),
                ("filter", "prefix:10.1101,type:posted-content"),
                ("rows", str(limit)),
            ]
        )
        return f"https://api.crossref.org/works?{params}"

    def parse(self, body: bytes, server: str, provenance_id: str, limit: int) -> list[PaperRecord]:
        try:
            items = json.loads(body)["message"]["items"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ResponseParseError(f"bad Crossref payload: {exc}") from exc
        records = []
        for item in items[:limit]:
            doi = item.get("DOI", "")
            titles = item.get("title") or []
            if not doi.startswith(BIORXIV_DOI_PREFIX) or not titles:
                continue
            authors = tuple(
                " ".join(part for part in (a.get("given"), a.get("family")) if part)
                for a in item.get("author", [])
            )
            parts = (item.get("created") or {}).get("date-parts") or [[1970, 1, 1]]
            ymd = (parts[0] + [1, 1])[:3]
            abstract = _JATS_TAG_RE.sub(" ", item.get("abstract", ""))
            records.append(
                PaperRecord(
                    repo=server,
                    native_id=doi,
                    title=" ".join(titles[0].split()),
                    authors=authors,
                    abstract=" ".join(abstract.split()),
                    pdf_url=content_pdf_url(server, doi),
                    published=date(*ymd),
                    provenance_id=provenance_id,
                )
            )
        return records


class BiorxivAdapter:
    def __init__(self, client: HttpClient, server: str, backend: SearchBackend | None = None):
        if server not in SERVERS:
            raise ValueError(f"unknown server: {server!r}")
        self.client = client
        self.server = server
        self.backend = backend if backend is not None else DetailsBackend()

    def search(self, query: SearchQuery, limit: int) -> list[PaperRecord]:
        url = self.backend.build_url(self.server, query.query_string, limit)
        try:
            response = self.client.send(HttpRequest("GET", url))
        except TransportError as exc:
            raise RepoUnavailable(f"{self.server} search failed: {exc}") from exc
        if response.status != 200:
            raise RepoUnavailable(f"{self.server} search returned {response.status}")
        assert response.store_key is not None
        return self.backend.parse(response.body, self.server, response.store_key, limit)
