"""Ready-to-paste BibTeX for a paper record.

arXiv entries are constructed locally from record metadata.  DOI-bearing
records use content negotiation against doi.org and get re-keyed to the
house scheme so inserted citations stay predictable.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from ..errors import BibParseError, BibUnavailable
from ..manuscript import BibEntry, format_entry, parse_single_entry, rekey_entry
from ..net import HttpClient, HttpRequest
from ..net.transport import TransportError
from .base import PaperRecord

ARXIV_METADATA = "arxiv_metadata"
DOI_NEGOTIATION = "doi_negotiation"

_KEY_KEEP_RE = re.compile(r"[^a-z0-9-]+")


@dataclass(frozen=True)
class AcquiredBibtex:
    entry: BibEntry
    source: str

    @property
    def key(self) -> str:
        return self.entry.key

    @property
    def raw(self) -> str:
        return self.entry.raw


def _ascii_slug(text: str) -> str:
    folded = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    return _KEY_KEEP_RE.sub("", folded.lower()).strip("-")


def _first_author_surname(record: PaperRecord) -> str:
    if not record.authors:
        return "anon"
    first = record.authors[0]
    if "," in first:
        surname = first.split(",", 1)[0]
    else:
        parts = first.split()
        surname = parts[-1] if parts else first
    return _ascii_slug(surname) or "anon"


def _first_title_word(record: PaperRecord) -> str:
    for word in record.title.split():
        slug = _ascii_slug(word)
        if slug:
            return slug
    return "untitled"


def citation_key(record: PaperRecord) -> str:
    return f"{_first_author_surname(record)}{record.published.year}{_first_title_word(record)}"


def arxiv_bibtex(record: PaperRecord) -> AcquiredBibtex:
    key = citation_key(record)
    fields = {
        "title": record.title,
        "author": " and ".join(record.authors) if record.authors else "unknown",
        "year": str(record.published.year),
        "eprint": record.native_id,
        "archiveprefix": "arXiv",
        "url": f"https://arxiv.org/abs/{record.native_id}",
    }
    raw = format_entry("misc", key, fields)
    return AcquiredBibtex(entry=parse_single_entry(raw), source=ARXIV_METADATA)


def doi_bibtex(client: HttpClient, record: PaperRecord) -> AcquiredBibtex:
    url = f"https://doi.org/{record.native_id}"
    request = HttpRequest("GET", url, headers={"Accept": "application/x-bibtex"})
    try:
        response = client.send(request)
    except TransportError as exc:
        raise BibUnavailable(f"doi.org negotiation failed: {exc}") from exc
    if response.status != 200:
        raise BibUnavailable(f"doi.org returned {response.status} for {record.native_id}")
    raw = response.body.decode("utf-8", errors="replace")
    entry = parse_single_entry(rekey_entry(raw, citation_key(record)))
    if not entry.fields.get("title", "").strip():
        raise BibParseError(f"negotiated entry for {record.native_id} has no title")
    return AcquiredBibtex(entry=entry, source=DOI_NEGOTIATION)


def fetch_bibtex(client: HttpClient, record: PaperRecord) -> AcquiredBibtex:
    if record.repo == "arxiv":
        return arxiv_bibtex(record)
    return doi_bibtex(client, record)
