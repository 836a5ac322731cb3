"""Build repository search queries from segmented claims.

Three strategies: the raw sentence as-is (no model calls), bare keyword
extraction, and keyword extraction that also sees the manuscript overview
and the paragraph around the selection.  The two keyword strategies batch
every claim into a single structured call.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Sequence

from .errors import BatchShapeMismatch
from .llm import LlmGateway, LlmRequest, TemplateId
from .manuscript import Claim, DocumentSchema

MAX_KEYWORDS = 8
MAX_QUERY_CHARS = 512

_KEYWORD_JUNK_RE = re.compile(r"[^A-Za-z0-9\- ]+")


class QueryVariant(str, enum.Enum):
    RAW_SENTENCE = "raw_sentence"
    KEYWORDS_ONLY = "keywords_only"
    CONTEXT_AWARE = "context_aware"


@dataclass(frozen=True)
class SearchQuery:
    claim_index: int
    variant: QueryVariant
    keywords: tuple[str, ...]
    query_string: str

    def __post_init__(self) -> None:
        if not self.query_string:
            raise ValueError("query_string must be non-empty")
        if len(self.query_string) > MAX_QUERY_CHARS:
            raise ValueError("query_string exceeds limit")


def sanitize_keyword(raw: str) -> str:
    """Letters, digits, hyphens and inner spaces only."""
    cleaned = _KEYWORD_JUNK_RE.sub(" ", raw)
    return " ".join(cleaned.split())


def _query_string(parts: Sequence[str]) -> str:
    joined = " ".join(parts)
    if len(joined) <= MAX_QUERY_CHARS:
        return joined
    clipped = joined[:MAX_QUERY_CHARS]
    # Avoid a chopped final word when a space is available to cut at.
    if " " in clipped:
        clipped = clipped[: clipped.rfind(" ")]
    return clipped


def _keyword_batch_validator(expected: int):
    def validate(parsed: dict) -> None:
        lists = parsed["keyword_lists"]
        if len(lists) != expected:
            raise BatchShapeMismatch(
                f"expected {expected} keyword lists, got {len(lists)}"
            )
        for position, keywords in enumerate(lists):
            if not any(sanitize_keyword(k) for k in keywords):
                raise BatchShapeMismatch(
                    f"keyword list {position} is empty after sanitisation"
                )

    return validate


def build_queries(
    gateway: LlmGateway | None,
    claims: Sequence[Claim],
    schema: DocumentSchema,
    surrounding_paragraph: str,
    variant: QueryVariant = QueryVariant.CONTEXT_AWARE,
) -> list[SearchQuery]:
    if not claims:
        return []
    if variant is QueryVariant.RAW_SENTENCE:
        return [
            SearchQuery(
                claim_index=claim.index_in_selection,
                variant=variant,
                keywords=(),
                query_string=_query_string([claim.sentence]),
            )
            for claim in claims
        ]

    if gateway is None:
        raise ValueError(f"{variant.value} requires a completion gateway")
    context_aware = variant is QueryVariant.CONTEXT_AWARE
    request = LlmRequest(
        TemplateId.KEYWORDS,
        {
            "schema_summary": schema.summary if context_aware else "",
            "surrounding_paragraph": surrounding_paragraph if context_aware else "",
            "sentences": "\n".join(json.dumps(claim.sentence) for claim in claims),
        },
    )
    reply = gateway.complete_structured(
        request, extra_validator=_keyword_batch_validator(len(claims))
    )
    queries: list[SearchQuery] = []
    for claim, raw_keywords in zip(claims, reply.parsed["keyword_lists"]):
        keywords = [sanitize_keyword(k) for k in raw_keywords]
        keywords = [k for k in keywords if k][:MAX_KEYWORDS]
        queries.append(
            SearchQuery(
                claim_index=claim.index_in_selection,
                variant=variant,
                keywords=tuple(keywords),
                query_string=_query_string(keywords),
            )
        )
    return queries
