"""Shared record type, dedup, and the primary/secondary search orchestration."""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Protocol, Sequence

from ..errors import RepoUnavailable, ResponseParseError
from ..query import SearchQuery
from ..routing import REPOSITORIES, RoutingDecision

# New-style ids like 1706.03762 (optionally versioned) or legacy
# archive/YYMMNNN ids like hep-th/9901001.
ARXIV_ID_RE = re.compile(r"^(?:\d{4}\.\d{4,5}(?:v\d+)?|[a-z-]+/\d{7})$")
BIORXIV_DOI_PREFIX = "10.1101/"

SEARCH_WORKERS = 3


@dataclass(frozen=True)
class PaperRecord:
    """One search hit, traceable to the stored response it was parsed from."""

    repo: str
    native_id: str
    title: str
    authors: tuple[str, ...]
    abstract: str
    pdf_url: str | None
    published: date
    provenance_id: str

    def __post_init__(self) -> None:
        if self.repo not in REPOSITORIES:
            raise ValueError(f"unknown repository: {self.repo!r}")
        if self.repo == "arxiv":
            if not ARXIV_ID_RE.match(self.native_id):
                raise ValueError(f"malformed arxiv id: {self.native_id!r}")
        elif not self.native_id.startswith(BIORXIV_DOI_PREFIX):
            raise ValueError(f"{self.repo} id must be a {BIORXIV_DOI_PREFIX} DOI: {self.native_id!r}")
        if not self.title.strip():
            raise ValueError("title must be non-empty")
        if not self.provenance_id:
            raise ValueError("provenance_id must be non-empty")


class RepositoryAdapter(Protocol):
    def search(self, query: SearchQuery, limit: int) -> list[PaperRecord]: ...


_TITLE_JUNK_RE = re.compile(r"[^a-z0-9]+")


def normalize_title(title: str) -> str:
    return " ".join(_TITLE_JUNK_RE.sub(" ", title.lower()).split())


def dedup_records(records: Sequence[PaperRecord]) -> list[PaperRecord]:
    """Drop later records whose normalised title was already seen."""
    seen: set[str] = set()
    kept: list[PaperRecord] = []
    for record in records:
        key = normalize_title(record.title)
        if key not in seen:
            seen.add(key)
            kept.append(record)
    return kept


def _search_all(
    adapter: RepositoryAdapter, queries: Sequence[SearchQuery], limit: int
) -> tuple[list[PaperRecord], list[Exception]]:
    """Run every query against one adapter, keeping query order in the pool."""

    def one(query: SearchQuery):
        try:
            return adapter.search(query, limit), None
        except (RepoUnavailable, ResponseParseError) as exc:
            return [], exc

    with ThreadPoolExecutor(max_workers=SEARCH_WORKERS) as pool:
        outcomes = list(pool.map(one, queries))
    pooled: list[PaperRecord] = []
    errors: list[Exception] = []
    for records, error in outcomes:
        pooled.extend(records[:limit])
        if error is not None:
            errors.append(error)
    return pooled, errors


def search_with_fallback(
    adapters: Mapping[str, RepositoryAdapter],
    decision: RoutingDecision,
    queries: Sequence[SearchQuery],
    per_claim_limit: int = 5,
) -> list[PaperRecord]:
    """Primary repository first; the secondary only when it yields nothing.

    Raises RepoUnavailable only when every repository that was attempted
    failed on every query.
    """
    if not queries:
        return []
    primary = adapters[decision.primary_repo]
    pooled, primary_errors = _search_all(primary, queries, per_claim_limit)
    if pooled:
        return dedup_records(pooled)
    attempted_all_failed = len(primary_errors) == len(queries)
    if decision.secondary_repo != "none":
        secondary = adapters[decision.secondary_repo]
        pooled, secondary_errors = _search_all(secondary, queries, per_claim_limit)
        if pooled:
            return dedup_records(pooled)
        attempted_all_failed = attempted_all_failed and len(secondary_errors) == len(queries)
    if attempted_all_failed:
        raise RepoUnavailable(
            f"all searched repositories failed for {len(queries)} queries"
        )
    return []
