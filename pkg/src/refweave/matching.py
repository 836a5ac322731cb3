"""Score candidate papers against a claim and rank them.

A cheap token-overlap shortlist keeps at most SHORTLIST_K paragraphs per
candidate; one structured model call scores that shortlist; the top three
paragraph scores become the candidate's evidence and the overall relevance
aggregates them.  Verified candidates always outrank unverifiable ones.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Sequence

from .errors import NoParagraphs, ProviderRefusal, ProviderUnreachable, SchemaViolation
from .llm import LlmGateway, LlmRequest, TemplateId
from .repositories import AcquiredBibtex, PaperRecord
from .verification import ParsedDocument

SHORTLIST_K = 12
TOP_MATCHES = 3
EXPLANATION_MAX_WORDS = 120

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class ParagraphMatch:
    paragraph_index: int
    score: float
    rationale: str


@dataclass(frozen=True)
class CandidateReference:
    record: PaperRecord
    bibtex: AcquiredBibtex
    verifiable: bool
    overall_relevance: float
    matches: tuple[ParagraphMatch, ...]
    explanation: str = ""
    unverified_reason: str | None = None


@dataclass(frozen=True)
class DiscoveryResult:
    claim_text: str
    candidates: tuple[CandidateReference, ...]
    top: int | None
    created_at: datetime
    trace: dict = field(default_factory=dict)


def tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


def lexical_shortlist(claim_text: str, paragraphs: Sequence[str], k: int = SHORTLIST_K) -> list[int]:
    """Indices of the k paragraphs sharing the most distinct tokens with
    the claim; ties break toward the earlier paragraph."""
    claim_tokens = tokens(claim_text)
    scored = [
        (len(claim_tokens & tokens(text)), index)
        for index, text in enumerate(paragraphs)
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [index for _, index in scored[:k]]


def clamp(value: float) -> float:
    return max(0.0, min(1.0, value))


def _score_validator(allowed: set[int]):
    def validate(parsed: dict) -> None:
        seen = set()
        for item in parsed["scores"]:
            index = item["paragraph_index"]
            if index not in allowed:
                raise SchemaViolation(f"paragraph_index {index} was not offered")
            if index in seen:
                raise SchemaViolation(f"paragraph_index {index} scored twice")
            seen.add(index)
        if not seen:
            raise SchemaViolation("no paragraphs scored")

    return validate


def score_candidate(
    gateway: LlmGateway,
    claim_text: str,
    surrounding_paragraph: str,
    record: PaperRecord,
    doc: ParsedDocument,
    aggregate: str = "max",
) -> tuple[float, tuple[ParagraphMatch, ...]]:
    """One structured call for the shortlist; returns (overall, top matches)."""
    if not doc.paragraphs:
        raise NoParagraphs(record.native_id)
    shortlist = lexical_shortlist(claim_text, [p.text for p in doc.paragraphs])
    offered = sorted(shortlist)
    paragraphs_block = "\n".join(
        f"[{index}] {doc.paragraph_text(index)}" for index in offered
    )
    request = LlmRequest(
        TemplateId.MATCH_SCORE,
        {
            "claim": claim_text,
            "surrounding_paragraph": surrounding_paragraph,
            "candidate_title": record.title,
            "paragraphs": paragraphs_block,
        },
    )
    reply = gateway.complete_structured(request, extra_validator=_score_validator(set(offered)))
    matches = [
        ParagraphMatch(
            paragraph_index=item["paragraph_index"],
            score=clamp(float(item["score"])),
            rationale=str(item["rationale"]),
        )
        for item in reply.parsed["scores"]
    ]
    matches.sort(key=lambda m: (-m.score, m.paragraph_index))
    top = tuple(matches[:TOP_MATCHES])
    if aggregate == "mean_top":
        overall = sum(m.score for m in top) / len(top)
    else:
        overall = top[0].score
    return clamp(overall), top


def rank_candidates(
    claim_text: str,
    scored: Sequence[CandidateReference],
    created_at: datetime,
    trace: dict | None = None,
) -> DiscoveryResult:
    """Verified first by relevance; newer papers win ties, then title order."""

    def sort_key(candidate: CandidateReference):
        return (
            0 if candidate.verifiable else 1,
            -candidate.overall_relevance,
            -candidate.record.published.toordinal(),
            candidate.record.title,
        )

    ordered = tuple(sorted(scored, key=sort_key))
    return DiscoveryResult(
        claim_text=claim_text,
        candidates=ordered,
        top=0 if ordered else None,
        created_at=created_at,
        trace=dict(trace or {}),
    )


def _extractive_explanation(candidate: CandidateReference, paragraph_texts: Mapping[int, str]) -> str:
    best = candidate.matches[0]
    quote = paragraph_texts.get(best.paragraph_index, "")
    if len(quote) > 300:
        quote = quote[:300].rsplit(" ", 1)[0] + "..."
    return (
        f"Best-matching paragraph #{best.paragraph_index} "
        f"(score {best.score:.2f}): \"{quote}\""
    )


def _mentions_match_index(text: str, matches: Sequence[ParagraphMatch]) -> bool:
    lowered = text.lower()
    for match in matches:
        if f"#{match.paragraph_index}" in lowered:
            return True
        if re.search(rf"paragraph\s+{match.paragraph_index}\b", lowered):
            return True
    return False


def explain_top(
    gateway: LlmGateway,
    claim_text: str,
    candidate: CandidateReference,
    paragraph_texts: Mapping[int, str],
) -> str:
    """Short grounded explanation; falls back to quoting the best paragraph
    when the model's text is too long, ungrounded, or unavailable."""
    if not candidate.matches:
        return "No paragraph evidence is available for this candidate."
    evidence = "\n".join(
        f"[#{match.paragraph_index}, score {match.score:.2f}] "
        f"{paragraph_texts.get(match.paragraph_index, '')}"
        for match in candidate.matches
    )
    context_block = (
        f"Claim:\n{claim_text}\n\n"
        f"Candidate paper: {candidate.record.title}\n"
        f"Matched paragraphs:\n{evidence}"
    )
    question = (
        "In at most 120 words, explain why this paper supports the claim. "
        "Cite at least one matched paragraph by its #index."
    )
    try:
        text = gateway.complete_text(
            LlmRequest(TemplateId.CHAT, {"context_block": context_block, "question": question})
        )
    except (ProviderRefusal, ProviderUnreachable):
        return _extractive_explanation(candidate, paragraph_texts)
    if len(text.split()) > EXPLANATION_MAX_WORDS:
        return _extractive_explanation(candidate, paragraph_texts)
    if not _mentions_match_index(text, candidate.matches):
        return _extractive_explanation(candidate, paragraph_texts)
    return text
