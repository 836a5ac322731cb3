"""HTTP surface of the discovery service."""

from __future__ import annotations

import json
from typing import Iterator

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from ..errors import (
    EgressDenied,
    EmptySelection,
    KeyBibMismatch,
    MalformedLatex,
    NoSuchCandidate,
    RefweaveError,
)
from .engine import ConflictError, ServiceEngine


class ManuscriptIn(BaseModel):
    tex_source: str
    bib_source: str = ""
    bib_path: str = "references.bib"


class DiscoverIn(BaseModel):
    manuscript_id: str
    start_offset: int = Field(ge=0)
    end_offset: int = Field(ge=0)


class InsertIn(BaseModel):
    job_id: str
    candidate_index: int = Field(ge=0)


class ChatOpenIn(BaseModel):
    job_id: str
    candidate_index: int = Field(ge=0)


class ChatMessageIn(BaseModel):
    message: str


def build_app(engine: ServiceEngine) -> FastAPI:
    app = FastAPI(title="refweave", docs_url=None, redoc_url=None)
    app.state.engine = engine

    @app.post("/api/manuscript")
    def add_manuscript(payload: ManuscriptIn):
        try:
            manuscript_id, manuscript = engine.add_manuscript(
                payload.tex_source, payload.bib_source, payload.bib_path
            )
        except MalformedLatex as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        schema = manuscript.schema
        return {
            "manuscript_id": manuscript_id,
            "title": schema.title,
            "section_headings": list(schema.section_headings),
            "summary": schema.summary,
            "revision": manuscript.revision,
        }

    @app.post("/api/discover")
    def discover(payload: DiscoverIn):
        try:
            job_id = engine.start_discovery(
                payload.manuscript_id, payload.start_offset, payload.end_offset
            )
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (ValueError, EmptySelection) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = engine.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job: {job_id}")
        return engine.job_payload(job)

    @app.get("/api/jobs/{job_id}/events")
    def job_events(job_id: str):
        if engine.jobs.get(job_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown job: {job_id}")

        def stream() -> Iterator[str]:
            index = 0
            while True:
                events, terminal = engine.jobs.events_since(job_id, index)
                for event in events:
                    data = json.dumps(
                        {"state": event["state"], "error": event.get("error")}
                    )
                    yield f"event: state\ndata: {data}\n\n"
                index += len(events)
                if terminal and not events:
                    yield "event: end\ndata: {}\n\n"
                    return
                if not events:
                    engine.jobs.wait_for_event(job_id, index, timeout=1.0)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/api/insert")
    def insert(payload: InsertIn):
        try:
            return engine.insert(payload.job_id, payload.candidate_index)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except NoSuchCandidate as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (KeyBibMismatch, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/api/chat/open")
    def chat_open(payload: ChatOpenIn):
        try:
            return engine.open_chat(payload.job_id, payload.candidate_index)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except NoSuchCandidate as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc

    @app.post("/api/chat/{session_id}")
    def chat_message(session_id: str, payload: ChatMessageIn):
        try:
            return engine.chat_message(session_id, payload.message)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except EgressDenied as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        except RefweaveError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    @app.get("/api/health")
    def health():
        return engine.health()

    return app
