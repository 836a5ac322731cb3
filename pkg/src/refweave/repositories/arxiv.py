"""Atom-feed search client for the arxiv.org export API."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from datetime import date, datetime
from urllib.parse import urlencode

from ..errors import RepoUnavailable, ResponseParseError
from ..net import HttpClient, HttpRequest, PolitenessGate
from ..net.transport import TransportError
from ..query import SearchQuery
from .base import PaperRecord

SEARCH_ENDPOINT = "http://export.arxiv.org/api/query"
ATOM_NS = {"atom": "http://www.w3.org/2005/Atom"}

_ID_PREFIX_RE = re.compile(r"^https?://arxiv\.org/abs/")
_VERSION_RE = re.compile(r"v\d+$")


def build_search_url(query_string: str, limit: int) -> str:
    params = urlencode(
        [("search_query", f"all:{query_string}"), ("start", "0"), ("max_results", str(limit))]
    )
    return f"{SEARCH_ENDPOINT}?{params}"


def _native_id(entry_id: str) -> str:
    stripped = _ID_PREFIX_RE.sub("", entry_id.strip())
    return _VERSION_RE.sub("", stripped)


def _text(element, path: str) -> str | None:
    node = element.find(path, ATOM_NS)
    if node is None or node.text is None:
        return None
    return " ".join(node.text.split())


def parse_atom_feed(body: bytes, provenance_id: str) -> list[PaperRecord]:
    try:
        root = ET.fromstring(body)
    except ET.ParseError as exc:
        raise ResponseParseError(f"bad Atom feed: {exc}") from exc
    records: list[PaperRecord] = []
    for entry in root.findall("atom:entry", ATOM_NS):
        entry_id = _text(entry, "atom:id")
        title = _text(entry, "atom:title")
        published = _text(entry, "atom:published")
        if not entry_id or not title or not published:
            raise ResponseParseError("feed entry missing id, title, or published date")
        native_id = _native_id(entry_id)
        authors = tuple(
            name
            for author in entry.findall("atom:author", ATOM_NS)
            if (name := _text(author, "atom:name"))
        )
        pdf_url = None
        for link in entry.findall("atom:link", ATOM_NS):
            if link.get("title") == "pdf" and link.get("href"):
                pdf_url = link.get("href")
                break
        try:
            published_date = datetime.fromisoformat(published.replace("Z", "+00:00")).date()
        except ValueError as exc:
            raise ResponseParseError(f"bad published date {published!r}") from exc
        records.append(
            PaperRecord(
                repo="arxiv",
                native_id=native_id,
                title=title,
                authors=authors,
                abstract=_text(entry, "atom:summary") or "",
                pdf_url=pdf_url or f"https://arxiv.org/pdf/{native_id}",
                published=published_date,
                provenance_id=provenance_id,
            )
        )
    return records


class ArxivAdapter:
    def __init__(self, client: HttpClient, politeness: PolitenessGate | None = None):
        self.client = client
        # Spacing matters only when real requests leave the machine.
        self.politeness = politeness if politeness is not None else PolitenessGate(3.0)

    def search(self, query: SearchQuery, limit: int) -> list[PaperRecord]:
        url = build_search_url(query.query_string, limit)
        if self.client.mode == "live":
            self.politeness.wait()
        try:
            response = self.client.send(HttpRequest("GET", url))
        except TransportError as exc:
            raise RepoUnavailable(f"arxiv search failed: {exc}") from exc
        if response.status != 200:
            raise RepoUnavailable(f"arxiv search returned {response.status}")
        assert response.store_key is not None
        return parse_atom_feed(response.body, response.store_key)
