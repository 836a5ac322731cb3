"""Self-contained offline demonstration universe.

Builds, from nothing, a data directory the service can run against in
replay mode: a sample manuscript, recorded repository search results, PDFs,
parsed-fulltext responses, negotiated BibTeX, canned model replies in both
mock-file and HTTP-completion form, and ready-to-use config files.

Construction runs in two phases. Phase one derives every request the
pipeline will make (the reply rules are deterministic, so query strings and
URLs are computable up front) and records the matching responses. Phase two
runs the real pipeline over those recordings with a model stand-in that
writes down each of its replies, so later runs can replay them through
either provider mode.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable
from urllib.parse import quote

from .evalharness import load_corpus
from .llm import MockLlmProvider, ProviderCall, TemplateId, completion_payload
from .net import FixtureStore, request_key
from .repositories.arxiv import build_search_url
from .repositories.biorxiv import content_pdf_url
from .service import ServiceEngine
from .service.config import Config, parse_config
from .service.jobs import DONE

GROBID_BASE_URL = "https://grobid.demo.test"
LLM_ENDPOINT = "https://llm.demo.test/v1/chat/completions"
LLM_MODEL = "demo-oracle-1"

# Planted in one manuscript paragraph; egress audits grep outbound requests
# for it to show manuscript text reaches the model host and nothing else.
SENTINEL = "Nightjar-Prototype-X17"

CHAT_DEMO_QUESTION = "Which paragraph supports this claim most directly?"

PER_CLAIM_LIMIT = 5

_MED_MARKERS = ("vaccination", "hospitalisation", "telemedicine", "consultation", "clinical")
_BIO_MARKERS = ("sequencing", "genome", "gene", "cell", "tumour", "protein")

_WORD_RE = re.compile(r"[a-z][a-z-]+")


def route_for(text: str) -> str:
    lowered = text.lower()
    if any(marker in lowered for marker in _MED_MARKERS):
        return "medrxiv"
    if any(marker in lowered for marker in _BIO_MARKERS):
        return "biorxiv"
    return "arxiv"


def keywords_for(sentence: str) -> list[str]:
    words = _WORD_RE.findall(sentence.lower())
    picked: list[str] = []
    for word in words:
        if len(word) >= 6 and word not in picked:
            picked.append(word)
        if len(picked) == 4:
            break
    return picked or words[:3]


def query_string_for(sentence: str) -> str:
    return " ".join(keywords_for(sentence))


class DemoRules:
    """The demonstration's stand-in model: replies are pure functions of the
    rendered call, so every run asks for byte-identical completions."""

    def __init__(self):
        self.calls: list[ProviderCall] = []
        self._lock = threading.Lock()

    def complete(self, call: ProviderCall) -> str:
        with self._lock:
            self.calls.append(call)
        handler = {
            TemplateId.ROUTE: self._route,
            TemplateId.KEYWORDS: self._keywords,
            TemplateId.MATCH_SCORE: self._match_score,
            TemplateId.CHAT: self._chat,
        }[call.template_id]
        return handler(call)

    @staticmethod
    def _route(call: ProviderCall) -> str:
        repo = route_for(call.variables["claims"])
        return json.dumps({
            "primary_repo": repo,
            "secondary_repo": "none",
            "confidence": 0.9,
            "reasoning": f"claim vocabulary points at {repo}",
        })

    @staticmethod
    def _keywords(call: ProviderCall) -> str:
        sentences = [json.loads(line) for line in call.variables["sentences"].splitlines()]
        return json.dumps({"keyword_lists": [keywords_for(s) for s in sentences]})

    @staticmethod
    def _match_score(call: ProviderCall) -> str:
        offered = [int(m) for m in re.findall(r"^\[(\d+)\]", call.variables["paragraphs"], re.M)]
        return json.dumps({
            "scores": [
                {
                    "paragraph_index": index,
                    "score": round(max(0.15, 0.9 - 0.18 * position), 2),
                    "rationale": "shares the claim's key terms",
                }
                for position, index in enumerate(offered)
            ]
        })

    @staticmethod
    def _chat(call: ProviderCall) -> str:
        found = re.search(r"#(\d+)", call.variables.get("context_block", ""))
        index = found.group(1) if found else "0"
        return (
            f"Paragraph #{index} states the same relationship the claim asserts, "
            "so it is the most direct support among the quoted matches."
        )


class RecordingProvider:
    """Answers from DemoRules while writing each reply down twice: as a
    mock-provider fixture file and as a recorded HTTP completion."""

    def __init__(self, rules: DemoRules, mock_dir: Path, store: FixtureStore):
        self.rules = rules
        self.mock_dir = Path(mock_dir)
        self.store = store

    def complete(self, call: ProviderCall) -> str:
        reply = self.rules.complete(call)
        MockLlmProvider.write_fixture(self.mock_dir, call.template_id, call.variables, reply)
        body = completion_payload(call, LLM_MODEL)
        self.store.put(
            request_key("POST", LLM_ENDPOINT, body),
            json.dumps({"choices": [{"message": {"content": reply}}]}).encode("utf-8"),
            url=LLM_ENDPOINT,
            status=200,
            headers={"Content-Type": "application/json"},
        )
        return reply


# -- candidate universe ---------------------------------------------------------


@dataclass(frozen=True)
class DemoCandidate:
    repo: str
    native_id: str
    title: str
    author: str
    published: str
    abstract: str
    pdf_url: str


def _candidates(sentence_number: int, sentence: str) -> list[DemoCandidate]:
    repo = route_for(sentence)
    topic = " ".join(keywords_for(sentence)[:2])
    out = []
    for j in range(1, PER_CLAIM_LIMIT + 1):
        if repo == "arxiv":
            native_id = f"24{sentence_number:02d}.{j:05d}"
            pdf_url = f"https://arxiv.org/pdf/{native_id}"
            published = f"2024-{j:02d}-01"
        else:
            native_id = f"10.1101/2026.{sentence_number:02d}.{j:02d}.000001"
            pdf_url = content_pdf_url(repo, native_id)
            published = f"2026-{j:02d}-01"
        out.append(
            DemoCandidate(
                repo=repo,
                native_id=native_id,
                title=f"{topic.capitalize()} perspectives, part {j}",
                author=f"Ada Demoauthor{sentence_number}{j}",
                published=published,
                abstract=f"Study {j} of {topic} under controlled conditions.",
                pdf_url=pdf_url,
            )
        )
    return out


def _tei_paragraphs(sentence: str, candidate_number: int) -> list[str]:
    claim_core = sentence.rstrip(".").lower()
    topic = " ".join(keywords_for(sentence)[:2])
    return [
        f"Earlier work established that {claim_core}.",
        f"Experiment {candidate_number} adds converging evidence on {topic}.",
        f"Open problems remain for {topic} at larger scales.",
    ]


def _tei_document(sentence: str, candidate_number: int) -> bytes:
    paragraphs = _tei_paragraphs(sentence, candidate_number)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<TEI xmlns="http://www.tei-c.org/ns/1.0">\n'
        "  <teiHeader/>\n"
        "  <text><body>\n"
        "    <div><head>Introduction</head>\n"
        f"      <p>{paragraphs[0]}</p>\n"
        f"      <p>{paragraphs[1]}</p>\n"
        "    </div>\n"
        "    <div><head>Discussion</head>\n"
        f"      <p>{paragraphs[2]}</p>\n"
        "    </div>\n"
        "  </body></text>\n"
        "</TEI>\n"
    ).encode("utf-8")


def _pdf_bytes(native_id: str) -> bytes:
    return f"%PDF-1.4\n% demo full text of {native_id}\n".encode() + b"0 " * 64


def _atom_feed(candidates: Iterable[DemoCandidate]) -> bytes:
    entries = []
    for c in candidates:
        entries.append(
            "  <entry>\n"
            f"    <id>http://arxiv.org/abs/{c.native_id}v1</id>\n"
            f"    <title>{c.title}</title>\n"
            f"    <published>{c.published}T00:00:00Z</published>\n"
            f"    <summary>{c.abstract}</summary>\n"
            f"    <author><name>{c.author}</name></author>\n"
            f'    <link title="pdf" href="{c.pdf_url}" rel="related"/>\n'
            "  </entry>\n"
        )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<feed xmlns="http://www.w3.org/2005/Atom">\n'
        + "".join(entries)
        + "</feed>\n"
    ).encode("utf-8")


def _details_json(candidates: Iterable[DemoCandidate]) -> bytes:
    collection = [
        {
            "doi": c.native_id,
            "title": c.title,
            "authors": c.author,
            "date": c.published,
            "abstract": c.abstract,
        }
        for c in candidates
    ]
    return json.dumps({"collection": collection}).encode("utf-8")


def _negotiated_bibtex(c: DemoCandidate) -> bytes:
    year = c.published[:4]
    return (
        f"@article{{temp_{c.native_id.replace('/', '_').replace('.', '_')},\n"
        f"  title = {{{c.title}}},\n"
        f"  author = {{{c.author}}},\n"
        f"  year = {{{year}}},\n"
        f"  doi = {{{c.native_id}}},\n"
        f"  journal = {{Preprint}},\n"
        f"}}\n"
    ).encode("utf-8")


def record_repository_responses(store: FixtureStore, corpus: list[tuple[str, str]]) -> int:
    """Phase one: write every repository, PDF, parse, and BibTeX response."""
    written = 0

    def put(key: str, body: bytes, url: str, content_type: str):
        nonlocal written
        store.put(key, body, url=url, status=200, headers={"Content-Type": content_type})
        written += 1

    for number, (_, sentence) in enumerate(corpus, start=1):
        repo = route_for(sentence)
        candidates = _candidates(number, sentence)
        query = query_string_for(sentence)
        if repo == "arxiv":
            url = build_search_url(query, PER_CLAIM_LIMIT)
            put(request_key("GET", url, None), _atom_feed(candidates), url, "application/atom+xml")
        else:
            url = f"https://api.biorxiv.org/search/{repo}/{quote(query)}/{PER_CLAIM_LIMIT}"
            put(request_key("GET", url, None), _details_json(candidates), url, "application/json")
        for c in candidates:
            pdf = _pdf_bytes(c.native_id)
            put(request_key("GET", c.pdf_url, None), pdf, c.pdf_url, "application/pdf")
            grobid_url = f"{GROBID_BASE_URL}/api/processFulltextDocument"
            tei_key = request_key(
                "POST", grobid_url, None, replay_extra=hashlib.sha256(pdf).digest()
            )
            put(tei_key, _tei_document(sentence, int(c.native_id[-1])), grobid_url,
                "application/xml")
            if repo != "arxiv":
                doi_url = f"https://doi.org/{c.native_id}"
                put(request_key("GET", doi_url, None), _negotiated_bibtex(c), doi_url,
                    "application/x-bibtex")
    return written


# -- manuscript -----------------------------------------------------------------


def build_demo_manuscript(corpus: list[tuple[str, str]]) -> str:
    paragraphs = []
    for number, (_, sentence) in enumerate(corpus, start=1):
        context = f"Our section {number} prototype, codename {SENTINEL}, depends on this result."
        paragraphs.append(f"{sentence} {context}")
    body = "\n\n".join(paragraphs)
    return (
        "\\documentclass{article}\n"
        "\\title{Grounded Claims: An Offline Walkthrough}\n"
        "\\begin{document}\n"
        "\\begin{abstract}\n"
        "Ten statements in need of supporting references, one per paragraph.\n"
        "\\end{abstract}\n"
        "\\section{Claims}\n"
        f"{body}\n"
        "\\end{document}\n"
    )


# -- orchestration ----------------------------------------------------------------


def demo_config_payload(dest: Path, llm_mode: str) -> dict:
    payload = {
        "data_dir": str(dest / "data"),
        "grobid": {"base_url": GROBID_BASE_URL},
        "search": {"query_variant": "context_aware"},
        "transport": {"mode": "replay"},
    }
    if llm_mode == "mock":
        payload["llm"] = {"mode": "mock", "mock_dir": str(dest / "mock")}
    else:
        payload["llm"] = {"mode": "http", "endpoint": LLM_ENDPOINT, "model": LLM_MODEL}
    return payload


def load_demo_config(dest: Path | str, llm_mode: str = "mock") -> Config:
    return parse_config(demo_config_payload(Path(dest), llm_mode))


def write_demo(dest: Path | str) -> dict:
    """Builds the full universe under `dest` and proves it runs end to end."""
    # Configs embed paths under dest; resolve so they work from any cwd.
    dest = Path(dest).resolve()
    dest.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus()

    store = FixtureStore(dest / "data" / "store")
    fixtures = record_repository_responses(store, corpus)

    tex_source = build_demo_manuscript(corpus)
    (dest / "manuscript.tex").write_text(tex_source)
    (dest / "references.bib").write_text("")

    for mode, name in (("mock", "config.json"), ("http", "config-httpllm.json")):
        (dest / name).write_text(json.dumps(demo_config_payload(dest, mode), indent=2) + "\n")

    # Generic reply for chat questions nobody recorded; keeps the mock-mode
    # chat panel usable for free-form questions.
    MockLlmProvider.write_fixture(
        dest / "mock", TemplateId.CHAT, None,
        "The quoted matched paragraphs are the basis for this suggestion; "
        "the highest-scoring one is the most direct support.",
    )

    engine = ServiceEngine(
        load_demo_config(dest, "mock"),
        provider=RecordingProvider(DemoRules(), dest / "mock", store),
    )
    manuscript_id, _ = engine.add_manuscript(tex_source)

    jobs = []
    for sentence_id, sentence in corpus:
        start = tex_source.index(sentence)
        job_id = engine.start_discovery(manuscript_id, start, start + len(sentence))
        job = engine.jobs.wait(job_id, timeout=60)
        if job.state != DONE:
            raise RuntimeError(f"{sentence_id} failed: {job.error_kind}: {job.error}")
        result = job.outcome.result
        jobs.append({
            "sentence_id": sentence_id,
            "job_id": job_id,
            "candidates": len(result.candidates),
            "top_cite_key": result.candidates[result.top].bibtex.key,
        })

    # One canonical chat exchange so both provider modes can replay it.
    first = engine.jobs.get(jobs[0]["job_id"])
    opened = engine.open_chat(first.job_id, first.outcome.result.top)
    engine.chat_message(opened["session_id"], CHAT_DEMO_QUESTION)

    # Query-variant comparison for the first sentence, so the side-by-side
    # view replays offline too.
    from .evalharness import compare_queries
    from .manuscript import make_selection, segment_sentences

    first_sentence = corpus[0][1]
    start = tex_source.index(first_sentence)
    selection = make_selection(tex_source, start, start + len(first_sentence))
    manuscript = engine.manuscript(manuscript_id)
    compare_queries(
        engine.gateway, segment_sentences(selection), manuscript.schema,
        selection.surrounding_paragraph,
    )

    return {
        "dest": str(dest),
        "manuscript": str(dest / "manuscript.tex"),
        "configs": [str(dest / "config.json"), str(dest / "config-httpllm.json")],
        "repository_fixtures": fixtures,
        "store_entries": len(store.keys()),
        "jobs": jobs,
    }
