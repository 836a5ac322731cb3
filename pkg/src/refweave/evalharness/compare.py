"""Side-by-side query strings for each construction variant.

The harness prints what each variant would send to the repositories so a
human can score clarity and specificity; it does not score them itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..llm import LlmGateway
from ..manuscript import Claim, DocumentSchema
from ..query import QueryVariant, build_queries

VARIANT_ORDER = (
    QueryVariant.RAW_SENTENCE,
    QueryVariant.KEYWORDS_ONLY,
    QueryVariant.CONTEXT_AWARE,
)


@dataclass(frozen=True)
class QueryRow:
    variant: QueryVariant
    claim_index: int
    query_string: str


def compare_queries(
    gateway: LlmGateway,
    claims: Sequence[Claim],
    schema: DocumentSchema,
    surrounding_paragraph: str,
) -> list[QueryRow]:
    if not claims:
        raise ValueError("need at least one claim")
    rows: list[QueryRow] = []
    for variant in VARIANT_ORDER:
        for query in build_queries(gateway, claims, schema, surrounding_paragraph, variant):
            rows.append(QueryRow(variant, query.claim_index, query.query_string))
    return rows


def rows_table(rows: Sequence[QueryRow]) -> str:
    header = ("variant", "claim", "query")
    widths = [
        max(len(header[0]), *(len(r.variant.value) for r in rows)),
        max(len(header[1]), *(len(str(r.claim_index)) for r in rows)),
    ]
    lines = [f"{header[0]:<{widths[0]}}  {header[1]:<{widths[1]}}  {header[2]}"]
    for row in rows:
        lines.append(
            f"{row.variant.value:<{widths[0]}}  {row.claim_index:<{widths[1]}}  {row.query_string}"
        )
    return "\n".join(lines)
