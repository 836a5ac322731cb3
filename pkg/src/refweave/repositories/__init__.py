from .base import (
    PaperRecord,
    RepositoryAdapter,
    dedup_records,
    normalize_title,
    search_with_fallback,
)
from .arxiv import ArxivAdapter
from .biorxiv import BiorxivAdapter, CrossrefBackend, DetailsBackend
from .fetch import AcquiredBibtex, arxiv_bibtex, citation_key, doi_bibtex, fetch_bibtex

__all__ = [
    "PaperRecord",
    "RepositoryAdapter",
    "normalize_title",
    "dedup_records",
    "search_with_fallback",
    "ArxivAdapter",
    "BiorxivAdapter",
    "DetailsBackend",
    "CrossrefBackend",
    "AcquiredBibtex",
    "citation_key",
    "arxiv_bibtex",
    "doi_bibtex",
    "fetch_bibtex",
]
