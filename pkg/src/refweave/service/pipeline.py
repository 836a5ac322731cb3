"""Selection-to-result orchestration.

Stage order: route the claims, search the chosen repositories, verify each
hit (BibTeX, then PDF, then parsed full text), score the survivors, rank.
Per-candidate failures downgrade or drop that candidate; they never fail
the whole run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Mapping

from ..errors import (
    BibParseError,
    BibUnavailable,
    EmptyDocument,
    GrobidUnavailable,
    NotAPdf,
    PdfUnavailable,
    ProviderRefusal,
    ProviderUnreachable,
    SchemaViolation,
    TeiParseError,
)
from ..llm import LlmGateway
from ..manuscript import DocumentSchema, Selection, normalize_ws, segment_sentences
from ..matching import (
    CandidateReference,
    DiscoveryResult,
    explain_top,
    rank_candidates,
    score_candidate,
)
from ..net import HttpClient
from ..query import QueryVariant, build_queries
from ..repositories import (
    AcquiredBibtex,
    PaperRecord,
    RepositoryAdapter,
    fetch_bibtex,
    search_with_fallback,
)
from ..routing import route_claims
from ..verification import GrobidClient, ParsedDocument, verify_fulltext

CANDIDATE_WORKERS = 3

STAGE_ROUTING = "routing"
STAGE_SEARCHING = "searching"
STAGE_VERIFYING = "verifying"
STAGE_MATCHING = "matching"

_VERIFY_FAILURES = (PdfUnavailable, NotAPdf, GrobidUnavailable, TeiParseError, EmptyDocument)


@dataclass(frozen=True)
class PipelineOutcome:
    result: DiscoveryResult
    # Paragraph texts backing each candidate's matches, keyed by native id.
    evidence: dict[str, dict[int, str]]
    schema_summary: str


@dataclass
class _Verified:
    record: PaperRecord
    bibtex: AcquiredBibtex | None
    doc: ParsedDocument | None
    failure: str | None


class DiscoveryPipeline:
    def __init__(
        self,
        gateway: LlmGateway,
        adapters: Mapping[str, RepositoryAdapter],
        http_client: HttpClient,
        grobid: GrobidClient,
        *,
        per_claim_limit: int = 5,
        query_variant: QueryVariant = QueryVariant.CONTEXT_AWARE,
        match_aggregate: str = "max",
        clock: Callable[[], datetime] | None = None,
    ):
        self.gateway = gateway
        self.adapters = adapters
        self.http_client = http_client
        self.grobid = grobid
        self.per_claim_limit = per_claim_limit
        self.query_variant = query_variant
        self.match_aggregate = match_aggregate
        self.clock = clock or (lambda: datetime.now(timezone.utc))

    def _verify_one(self, record: PaperRecord) -> _Verified:
        try:
            bibtex = fetch_bibtex(self.http_client, record)
        except (BibUnavailable, BibParseError) as exc:
            # Without a pasteable entry the candidate is useless; drop it.
            return _Verified(record, None, None, f"bibtex: {exc}")
        try:
            doc = verify_fulltext(self.http_client, self.grobid, record)
            return _Verified(record, bibtex, doc, None)
        except _VERIFY_FAILURES as exc:
            return _Verified(record, bibtex, None, f"{type(exc).__name__}: {exc}")

    def _score_one(
        self, claim_text: str, surrounding: str, verified: _Verified
    ) -> tuple[CandidateReference, dict[int, str]]:
        assert verified.bibtex is not None
        if verified.doc is None:
            candidate = CandidateReference(
                record=verified.record,
                bibtex=verified.bibtex,
                verifiable=False,
                overall_relevance=0.0,
                matches=(),
                unverified_reason=verified.failure,
            )
            return candidate, {}
        try:
            overall, matches = score_candidate(
                self.gateway, claim_text, surrounding, verified.record, verified.doc,
                aggregate=self.match_aggregate,
            )
        except (SchemaViolation, ProviderRefusal, ProviderUnreachable) as exc:
            candidate = CandidateReference(
                record=verified.record,
                bibtex=verified.bibtex,
                verifiable=False,
                overall_relevance=0.0,
                matches=(),
                unverified_reason=f"scoring: {exc}",
            )
            return candidate, {}
        evidence = {
            match.paragraph_index: verified.doc.paragraph_text(match.paragraph_index)
            for match in matches
        }
        candidate = CandidateReference(
            record=verified.record,
            bibtex=verified.bibtex,
            verifiable=True,
            overall_relevance=overall,
            matches=matches,
        )
        return candidate, evidence

    def run(
        self,
        schema: DocumentSchema,
        selection: Selection,
        observer: Callable[[str], None] = lambda stage: None,
    ) -> PipelineOutcome:
        observer(STAGE_ROUTING)
        claims = segment_sentences(selection)
        decision = route_claims(self.gateway, claims, schema)

        observer(STAGE_SEARCHING)
        queries = build_queries(
            self.gateway, claims, schema, selection.surrounding_paragraph, self.query_variant
        )
        records = search_with_fallback(
            self.adapters, decision, queries, per_claim_limit=self.per_claim_limit
        )

        observer(STAGE_VERIFYING)
        dropped: list[dict[str, str]] = []
        verified: list[_Verified] = []
        with ThreadPoolExecutor(max_workers=CANDIDATE_WORKERS) as pool:
            for outcome in pool.map(self._verify_one, records):
                if outcome.bibtex is None:
                    dropped.append(
                        {"native_id": outcome.record.native_id, "reason": outcome.failure or ""}
                    )
                else:
                    verified.append(outcome)

        observer(STAGE_MATCHING)
        claim_text = normalize_ws(selection.text)
        scored: list[CandidateReference] = []
        evidence: dict[str, dict[int, str]] = {}
        with ThreadPoolExecutor(max_workers=CANDIDATE_WORKERS) as pool:
            outcomes = list(
                pool.map(
                    lambda v: self._score_one(claim_text, selection.surrounding_paragraph, v),
                    verified,
                )
            )
        for candidate, paragraph_texts in outcomes:
            scored.append(candidate)
            if paragraph_texts:
                evidence[candidate.record.native_id] = paragraph_texts

        trace = {
            "routing": {
                "primary_repo": decision.primary_repo,
                "secondary_repo": decision.secondary_repo,
                "confidence": decision.confidence,
                "reasoning": decision.reasoning,
            },
            "queries": [
                {"claim_index": q.claim_index, "variant": q.variant.value,
                 "query_string": q.query_string}
                for q in queries
            ],
            "claim_count": len(claims),
            "dropped": dropped,
        }
        result = rank_candidates(claim_text, scored, created_at=self.clock(), trace=trace)
        if result.top is not None:
            top = result.candidates[result.top]
            if top.matches:
                explanation = explain_top(
                    self.gateway, claim_text, top,
                    evidence.get(top.record.native_id, {}),
                )
                explained = CandidateReference(
                    record=top.record, bibtex=top.bibtex, verifiable=top.verifiable,
                    overall_relevance=top.overall_relevance, matches=top.matches,
                    explanation=explanation, unverified_reason=top.unverified_reason,
                )
                candidates = list(result.candidates)
                candidates[result.top] = explained
                result = DiscoveryResult(
                    claim_text=result.claim_text, candidates=tuple(candidates),
                    top=result.top, created_at=result.created_at, trace=result.trace,
                )
        return PipelineOutcome(result=result, evidence=evidence, schema_summary=schema.summary)
