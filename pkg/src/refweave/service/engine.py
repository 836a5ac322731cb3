"""Wires configuration into a running discovery service."""

from __future__ import annotations

import hashlib
import threading
from datetime import datetime, timezone
from typing import Any, Callable

from ..chat import ChatSession, context_block, open_session, send_message
from ..errors import NoSuchCandidate, RefweaveError
from ..llm import HttpLlmProvider, LlmGateway, MockLlmProvider
from ..manuscript import Manuscript, insert_citation, make_selection, resolve_cite_key
from ..matching import CandidateReference, DiscoveryResult
from ..net import (
    FixtureStore,
    HttpClient,
    LiveTransport,
    ReplayTransport,
    RequestRecorder,
)
from ..repositories import ArxivAdapter, BiorxivAdapter, CrossrefBackend, DetailsBackend
from ..verification import GrobidClient
from .config import Config
from .egress import EgressPolicy
from .jobs import DONE, DiscoveryJob, JobManager
from .journal import Journal
from .pipeline import DiscoveryPipeline, PipelineOutcome


class ConflictError(RefweaveError):
    """The manuscript changed since this job ran; offsets are stale."""


class ServiceEngine:
    def __init__(
        self,
        config: Config,
        clock: Callable[[], datetime] | None = None,
        provider=None,
    ):
        self.config = config
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self.store = FixtureStore(config.store_path)
        self.recorder = RequestRecorder()
        self.policy = EgressPolicy.from_config(config, self.store)
        transport = (
            ReplayTransport(self.store)
            if config.transport_mode == "replay"
            else LiveTransport()
        )
        self.http_client = HttpClient(
            transport,
            self.store,
            mode=config.transport_mode,
            policy=self.policy,
            recorder=self.recorder,
            retry=config.retry,
        )
        if provider is None:
            if config.llm.mode == "mock":
                provider = MockLlmProvider(config.llm.mock_dir)
            else:
                provider = HttpLlmProvider(
                    self.http_client, config.llm.endpoint, config.llm.model, config.llm.api_key
                )
        self.gateway = LlmGateway(provider)
        backend = CrossrefBackend() if config.biorxiv_backend == "crossref" else DetailsBackend()
        self.adapters = {
            "arxiv": ArxivAdapter(self.http_client),
            "biorxiv": BiorxivAdapter(self.http_client, "biorxiv", backend),
            "medrxiv": BiorxivAdapter(self.http_client, "medrxiv", backend),
        }
        self.grobid = GrobidClient(self.http_client, config.grobid_base_url)
        self.pipeline = DiscoveryPipeline(
            self.gateway,
            self.adapters,
            self.http_client,
            self.grobid,
            per_claim_limit=config.per_claim_limit,
            query_variant=config.query_variant,
            match_aggregate=config.match_aggregate,
            clock=self.clock,
        )
        self.journal = Journal(config.journal_path)
        self.jobs = JobManager(self.journal)
        self.jobs.recover()
        self._manuscripts: dict[str, Manuscript] = {}
        self._sessions: dict[str, ChatSession] = {}
        self._write_lock = threading.Lock()

    # -- manuscripts ----------------------------------------------------------

    def add_manuscript(
        self, tex_source: str, bib_source: str = "", bib_path: str = "references.bib"
    ) -> tuple[str, Manuscript]:
        manuscript = Manuscript.load(tex_source, bib_path=bib_path, bib_source=bib_source)
        manuscript_id = hashlib.sha256(tex_source.encode("utf-8")).hexdigest()[:12]
        with self._write_lock:
            self._manuscripts[manuscript_id] = manuscript
        return manuscript_id, manuscript

    def manuscript(self, manuscript_id: str) -> Manuscript:
        try:
            return self._manuscripts[manuscript_id]
        except KeyError:
            raise KeyError(f"unknown manuscript: {manuscript_id}") from None

    # -- discovery ------------------------------------------------------------

    def start_discovery(self, manuscript_id: str, start_offset: int, end_offset: int) -> str:
        manuscript = self.manuscript(manuscript_id)
        selection = make_selection(manuscript.tex_source, start_offset, end_offset)

        def run(job: DiscoveryJob, observer: Callable[[str], None]) -> PipelineOutcome:
            return self.pipeline.run(manuscript.schema, selection, observer)

        return self.jobs.submit(
            manuscript_id,
            start_offset=start_offset,
            end_offset=end_offset,
            selection_text=selection.text,
            revision=manuscript.revision,
            run=run,
        )

    # -- serialization ----------------------------------------------------------

    def _candidate_payload(
        self, candidate: CandidateReference, evidence: dict[str, dict[int, str]]
    ) -> dict[str, Any]:
        record = candidate.record
        quotes = evidence.get(record.native_id, {})
        return {
            "repo": record.repo,
            "native_id": record.native_id,
            "title": record.title,
            "authors": list(record.authors),
            "abstract": record.abstract,
            "pdf_url": record.pdf_url,
            "published": record.published.isoformat(),
            "verifiable": candidate.verifiable,
            "overall_relevance": candidate.overall_relevance,
            "cite_key": candidate.bibtex.key,
            "bibtex": candidate.bibtex.raw,
            "bibtex_source": candidate.bibtex.source,
            "explanation": candidate.explanation,
            "unverified_reason": candidate.unverified_reason,
            "provenance_id": record.provenance_id,
            "matches": [
                {
                    "paragraph_index": match.paragraph_index,
                    "score": match.score,
                    "rationale": match.rationale,
                    "text": quotes.get(match.paragraph_index, ""),
                }
                for match in candidate.matches
            ],
        }

    def job_payload(self, job: DiscoveryJob) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "job_id": job.job_id,
            "manuscript_id": job.manuscript_id,
            "state": job.state,
            "error": job.error,
            "error_kind": job.error_kind,
            "timings": {k: v for k, v in job.timings.items() if not k.startswith("_")},
            "selection": {
                "start_offset": job.start_offset,
                "end_offset": job.end_offset,
                "text": job.selection_text,
            },
            "result": None,
        }
        if job.outcome is not None:
            result: DiscoveryResult = job.outcome.result
            payload["result"] = {
                "claim_text": result.claim_text,
                "created_at": result.created_at.isoformat(),
                "top": result.top,
                "trace": result.trace,
                "candidates": [
                    self._candidate_payload(c, job.outcome.evidence)
                    for c in result.candidates
                ],
            }
        return payload

    # -- insertion --------------------------------------------------------------

    def insert(self, job_id: str, candidate_index: int) -> dict[str, Any]:
        job = self.jobs.get(job_id)
        if job is None:
            raise KeyError(f"unknown job: {job_id}")
        if job.state != DONE or job.outcome is None:
            raise ConflictError(f"job {job_id} is {job.state}, not done")
        result = job.outcome.result
        if not 0 <= candidate_index < len(result.candidates):
            raise NoSuchCandidate(f"candidate {candidate_index} of {len(result.candidates)}")
        candidate = result.candidates[candidate_index]
        with self._write_lock:
            manuscript = self.manuscript(job.manuscript_id)
            if manuscript.revision != job.revision:
                raise ConflictError(
                    "manuscript changed since discovery ran; run discovery again"
                )
            selection = make_selection(
                manuscript.tex_source, job.start_offset, job.end_offset
            )
            final_key = resolve_cite_key(manuscript, candidate.bibtex.key, candidate.bibtex.raw)
            updated = insert_citation(
                manuscript, selection, candidate.bibtex.key, candidate.bibtex.raw
            )
            self._manuscripts[job.manuscript_id] = updated
        self.journal.append(
            "insert",
            {"job_id": job_id, "candidate_index": candidate_index, "cite_key": final_key},
        )
        return {
            "cite_key": final_key,
            "tex_source": updated.tex_source,
            "bib_source": updated.bib_source,
            "revision": updated.revision,
        }

    # -- chat ---------------------------------------------------------------------

    def open_chat(self, job_id: str, candidate_index: int) -> dict[str, Any]:
        job = self.jobs.get(job_id)
        if job is None:
            raise KeyError(f"unknown job: {job_id}")
        if job.state != DONE or job.outcome is None:
            raise ConflictError(f"job {job_id} is {job.state}, not done")
        result = job.outcome.result
        if not 0 <= candidate_index < len(result.candidates):
            raise NoSuchCandidate(f"candidate {candidate_index} of {len(result.candidates)}")
        candidate = result.candidates[candidate_index]
        session = open_session(
            result,
            candidate_index,
            job.outcome.schema_summary,
            evidence=job.outcome.evidence.get(candidate.record.native_id, {}),
        )
        self._sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "context": context_block(session),
            "candidate_title": candidate.record.title,
        }

    def chat_message(self, session_id: str, text: str) -> dict[str, Any]:
        try:
            session = self._sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown chat session: {session_id}") from None
        reply = send_message(self.gateway, session, text)
        return {"reply": reply, "turns": len(session.turns)}

    # -- health ---------------------------------------------------------------------

    def health(self) -> dict[str, Any]:
        return {
            "status": "ok",
            "transport_mode": self.config.transport_mode,
            "llm_mode": self.config.llm.mode,
            "store_entries": len(self.store.keys()),
            "manuscripts": len(self._manuscripts),
        }
