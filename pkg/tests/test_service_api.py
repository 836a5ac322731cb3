"""End-to-end service tests over a small recorded-response universe.

Two arXiv hits for one claim: the first has a PDF and parses cleanly, the
second 404s on its PDF so it must surface as unverifiable. All HTTP goes
through replay; the language model is a deterministic rule table.
"""

import hashlib
import json
import re
import threading

import pytest
from fastapi.testclient import TestClient

from refweave.llm import TemplateId
from refweave.net import FixtureStore, request_key
from refweave.repositories.arxiv import build_search_url
from refweave.service import ServiceEngine, build_app
from refweave.service.config import parse_config
from refweave.service.jobs import DONE, FAILED

SENTENCE = "Transformers rely on attention."

TEX_SOURCE = """\\documentclass{article}
\\title{A Tiny Study}
\\begin{document}
\\section{Background}
Transformers rely on attention. They drop recurrence entirely.

\\section{Method}
We fine-tune a small model on the usual benchmarks.
\\end{document}
"""

ATOM_FEED = b"""<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <entry>
    <id>http://arxiv.org/abs/2301.00001v2</id>
    <title>Attention Mechanisms Reviewed</title>
    <published>2023-01-02T00:00:00Z</published>
    <summary>A survey of attention in sequence models.</summary>
    <author><name>Maria Ortega</name></author>
    <author><name>Wei Chen</name></author>
    <link title="pdf" href="https://arxiv.org/pdf/2301.00001" rel="related"/>
  </entry>
  <entry>
    <id>http://arxiv.org/abs/2205.05555v1</id>
    <title>Sequence Models Without Recurrence</title>
    <published>2022-05-06T00:00:00Z</published>
    <summary>Replacing recurrent layers wholesale.</summary>
    <author><name>Priya Natarajan</name></author>
  </entry>
</feed>
"""

TEI_PARAGRAPHS = [
    "Attention mechanisms let a model weigh distant tokens directly.",
    "Transformers rely on attention instead of recurrence for sequence transduction.",
    "We review scaling behaviour across model sizes and datasets.",
]

TEI_DOC = f"""<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
  <teiHeader/>
  <text><body>
    <div><head>Introduction</head>
      <p>{TEI_PARAGRAPHS[0]}</p>
      <p>{TEI_PARAGRAPHS[1]}</p>
    </div>
    <div><head>Findings</head>
      <p>{TEI_PARAGRAPHS[2]}</p>
    </div>
  </body></text>
</TEI>
""".encode()

PDF_BODY = b"%PDF-1.5\n" + b"attention survey page bytes " * 40

GROBID_BASE = "https://grobid.test"


class RuleBasedProvider:
    """Deterministic replies keyed on the template, safe under threads."""

    def __init__(self):
        self.calls = []
        self._lock = threading.Lock()

    def complete(self, call):
        with self._lock:
            self.calls.append(call)
        if call.template_id is TemplateId.ROUTE:
            return json.dumps({
                "primary_repo": "arxiv",
                "secondary_repo": "none",
                "confidence": 0.9,
                "reasoning": "neural sequence modelling methods",
            })
        if call.template_id is TemplateId.KEYWORDS:
            count = len(call.variables["sentences"].splitlines())
            return json.dumps({"keyword_lists": [["attention", "transformer"]] * count})
        if call.template_id is TemplateId.MATCH_SCORE:
            offered = [int(m) for m in re.findall(r"^\[(\d+)\]", call.variables["paragraphs"], re.M)]
            scores = [
                {
                    "paragraph_index": index,
                    "score": round(max(0.1, 0.9 - 0.2 * position), 2),
                    "rationale": "states the same mechanism",
                }
                for position, index in enumerate(offered)
            ]
            return json.dumps({"scores": scores})
        if call.template_id is TemplateId.CHAT:
            found = re.search(r"#(\d+)", call.variables.get("context_block", ""))
            index = found.group(1) if found else "0"
            return f"Paragraph #{index} of this paper makes the same point about attention."
        raise AssertionError(f"unexpected template {call.template_id}")


def build_universe(tmp_path):
    """Record every response the pipeline will ask for, then hand back a config."""
    data_dir = tmp_path / "data"
    store = FixtureStore(data_dir / "store")

    search_url = build_search_url(SENTENCE, 5)
    store.put(request_key("GET", search_url, None), ATOM_FEED,
              url=search_url, status=200,
              headers={"Content-Type": "application/atom+xml"})

    good_pdf = "https://arxiv.org/pdf/2301.00001"
    store.put(request_key("GET", good_pdf, None), PDF_BODY,
              url=good_pdf, status=200, headers={"Content-Type": "application/pdf"})

    missing_pdf = "https://arxiv.org/pdf/2205.05555"
    store.put(request_key("GET", missing_pdf, None), b"not here",
              url=missing_pdf, status=404, headers={"Content-Type": "text/plain"})

    grobid_url = f"{GROBID_BASE}/api/processFulltextDocument"
    grobid_key = request_key("POST", grobid_url, None,
                             replay_extra=hashlib.sha256(PDF_BODY).digest())
    store.put(grobid_key, TEI_DOC, url=grobid_url, status=200,
              headers={"Content-Type": "application/xml"})

    payload = {
        "data_dir": str(data_dir),
        "llm": {"mode": "mock", "mock_dir": str(tmp_path / "mock")},
        "grobid": {"base_url": GROBID_BASE},
        "search": {"query_variant": "raw_sentence"},
    }
    return parse_config(payload)


@pytest.fixture()
def engine(tmp_path):
    return ServiceEngine(build_universe(tmp_path), provider=RuleBasedProvider())


def selection_offsets():
    start = TEX_SOURCE.index("Transformers")
    return start, start + len(SENTENCE)


def run_discovery(engine):
    manuscript_id, _ = engine.add_manuscript(TEX_SOURCE)
    start, end = selection_offsets()
    job_id = engine.start_discovery(manuscript_id, start, end)
    job = engine.jobs.wait(job_id, timeout=30)
    assert job.state == DONE, f"job failed: {job.error_kind}: {job.error}"
    return manuscript_id, job


class TestPipelineThroughEngine:
    def test_result_shape_and_ranking(self, engine):
        _, job = run_discovery(engine)
        result = job.outcome.result
        assert result.claim_text == SENTENCE
        assert [c.record.native_id for c in result.candidates] == [
            "2301.00001", "2205.05555",
        ]
        top = result.candidates[result.top]
        assert top.verifiable and top.overall_relevance == pytest.approx(0.9)
        assert top.bibtex.key == "ortega2023attention"
        assert "@misc" in top.bibtex.raw
        loser = result.candidates[1]
        assert not loser.verifiable
        assert "PdfUnavailable" in loser.unverified_reason
        assert loser.bibtex.key == "natarajan2022sequence"

    def test_match_evidence_quotes_real_paragraphs(self, engine):
        _, job = run_discovery(engine)
        top = job.outcome.result.candidates[0]
        assert top.matches
        quotes = job.outcome.evidence["2301.00001"]
        for match in top.matches:
            assert quotes[match.paragraph_index] == TEI_PARAGRAPHS[match.paragraph_index]

    def test_provenance_resolves_to_stored_bytes(self, engine):
        _, job = run_discovery(engine)
        for candidate in job.outcome.result.candidates:
            raw = engine.store.get_body(candidate.record.provenance_id)
            assert candidate.record.native_id.encode() in raw

    def test_trace_and_stage_timings(self, engine):
        _, job = run_discovery(engine)
        trace = job.outcome.result.trace
        assert trace["routing"]["primary_repo"] == "arxiv"
        assert trace["claim_count"] == 1
        assert trace["queries"][0]["query_string"] == SENTENCE
        assert trace["dropped"] == []
        assert set(job.timings) >= {"routing", "searching", "verifying", "matching"}

    def test_top_candidate_gets_grounded_explanation(self, engine):
        _, job = run_discovery(engine)
        top = job.outcome.result.candidates[0]
        assert top.explanation is not None
        assert re.search(r"#\d+", top.explanation)

    def test_no_requests_escaped_the_policy(self, engine):
        run_discovery(engine)
        assert engine.policy.denials() == []
        hosts = {entry.host for entry in engine.recorder.entries()}
        assert hosts <= engine.config.allowed_hosts()

    def test_empty_selection_rejected_before_submit(self, engine):
        manuscript_id, _ = engine.add_manuscript(TEX_SOURCE)
        with pytest.raises(Exception):
            engine.start_discovery(manuscript_id, 10, 10)

    def test_unknown_search_sentence_fails_job(self, engine):
        tex = TEX_SOURCE.replace("Transformers rely on attention.",
                                 "Nobody recorded this claim at all.")
        manuscript_id, _ = engine.add_manuscript(tex)
        start = tex.index("Nobody")
        job_id = engine.start_discovery(
            manuscript_id, start, start + len("Nobody recorded this claim at all."))
        job = engine.jobs.wait(job_id, timeout=30)
        assert job.state == FAILED
        assert job.error_kind in {"RepoUnavailable", "FixtureMissing"}


class TestHttpApi:
    @pytest.fixture()
    def client(self, engine):
        return TestClient(build_app(engine))

    def add_manuscript(self, client, tex=TEX_SOURCE):
        response = client.post("/api/manuscript", json={"tex_source": tex})
        assert response.status_code == 200
        return response.json()

    def discover_and_wait(self, client):
        manuscript_id = self.add_manuscript(client)["manuscript_id"]
        start, end = selection_offsets()
        response = client.post("/api/discover", json={
            "manuscript_id": manuscript_id, "start_offset": start, "end_offset": end,
        })
        assert response.status_code == 200
        job_id = response.json()["job_id"]
        for _ in range(300):
            payload = client.get(f"/api/jobs/{job_id}").json()
            if payload["state"] in (DONE, FAILED):
                break
        assert payload["state"] == DONE, payload
        return manuscript_id, job_id, payload

    def test_manuscript_roundtrip_and_schema(self, client):
        payload = self.add_manuscript(client)
        assert payload["title"] == "A Tiny Study"
        assert payload["section_headings"] == ["Background", "Method"]
        assert payload["revision"] == 0

    def test_non_latex_rejected(self, client):
        response = client.post("/api/manuscript", json={
            "tex_source": "just a plain text note with no structure at all",
        })
        assert response.status_code == 422

    def test_discover_unknown_manuscript(self, client):
        response = client.post("/api/discover", json={
            "manuscript_id": "nope", "start_offset": 0, "end_offset": 3,
        })
        assert response.status_code == 404

    def test_discover_bad_offsets(self, client):
        manuscript_id = self.add_manuscript(client)["manuscript_id"]
        response = client.post("/api/discover", json={
            "manuscript_id": manuscript_id, "start_offset": 7, "end_offset": 7,
        })
        assert response.status_code == 422

    def test_job_payload_carries_everything_a_ui_needs(self, client):
        _, _, payload = self.discover_and_wait(client)
        assert payload["selection"]["text"] == SENTENCE
        result = payload["result"]
        assert result["top"] == 0
        top = result["candidates"][0]
        assert top["cite_key"] == "ortega2023attention"
        assert top["bibtex"].startswith("@misc{ortega2023attention")
        assert top["title"] == "Attention Mechanisms Reviewed"
        assert top["matches"][0]["text"] in TEI_PARAGRAPHS
        assert top["provenance_id"]
        other = result["candidates"][1]
        assert other["verifiable"] is False and other["matches"] == []
        assert all(not key.startswith("_") for key in payload["timings"])

    def test_unknown_job_404(self, client):
        assert client.get("/api/jobs/missing").status_code == 404

    def test_event_stream_reports_each_state_once(self, client):
        _, job_id, _ = self.discover_and_wait(client)
        states = []
        with client.stream("GET", f"/api/jobs/{job_id}/events") as response:
            assert response.headers["content-type"].startswith("text/event-stream")
            event = None
            for line in response.iter_lines():
                if line.startswith("event: "):
                    event = line.removeprefix("event: ")
                elif line.startswith("data: ") and event == "state":
                    states.append(json.loads(line.removeprefix("data: "))["state"])
                elif event == "end":
                    break
        assert states == ["queued", "routing", "searching", "verifying", "matching", "done"]

    def test_insert_places_citation_and_bib_entry(self, client):
        _, job_id, _ = self.discover_and_wait(client)
        response = client.post("/api/insert", json={"job_id": job_id, "candidate_index": 0})
        assert response.status_code == 200
        body = response.json()
        assert body["cite_key"] == "ortega2023attention"
        assert "Transformers rely on attention~\\cite{ortega2023attention}." in body["tex_source"]
        assert "@misc{ortega2023attention" in body["bib_source"]
        assert body["revision"] == 1

    def test_second_insert_conflicts(self, client):
        _, job_id, _ = self.discover_and_wait(client)
        assert client.post("/api/insert",
                           json={"job_id": job_id, "candidate_index": 0}).status_code == 200
        response = client.post("/api/insert", json={"job_id": job_id, "candidate_index": 0})
        assert response.status_code == 409

    def test_insert_bad_candidate_404(self, client):
        _, job_id, _ = self.discover_and_wait(client)
        response = client.post("/api/insert", json={"job_id": job_id, "candidate_index": 9})
        assert response.status_code == 404

    def test_chat_open_and_message(self, client):
        _, job_id, _ = self.discover_and_wait(client)
        opened = client.post("/api/chat/open", json={"job_id": job_id, "candidate_index": 0})
        assert opened.status_code == 200
        body = opened.json()
        assert body["candidate_title"] == "Attention Mechanisms Reviewed"
        assert "Attention Mechanisms Reviewed" in body["context"]
        assert TEI_PARAGRAPHS[0] in body["context"] or TEI_PARAGRAPHS[1] in body["context"]
        reply = client.post(f"/api/chat/{body['session_id']}",
                            json={"message": "Which paragraph backs this up?"})
        assert reply.status_code == 200
        assert re.search(r"#\d+", reply.json()["reply"])

    def test_chat_unknown_session_404(self, client):
        response = client.post("/api/chat/ghost", json={"message": "hello"})
        assert response.status_code == 404

    def test_health(self, client):
        payload = client.get("/api/health").json()
        assert payload["status"] == "ok"
        assert payload["transport_mode"] == "replay"
