"""Follow-up conversation about a single candidate reference.

Each session is pinned to one candidate from one discovery result; the
model only ever sees that candidate's metadata and matched paragraphs,
plus a sliding window of recent turns.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Mapping

from .errors import NoSuchCandidate
from .llm import LlmGateway, LlmRequest, TemplateId
from .matching import CandidateReference, DiscoveryResult

CHAT_WINDOW_TURNS = 10


@dataclass
class ChatSession:
    session_id: str
    claim_text: str
    paper_summary: str
    candidate: CandidateReference
    evidence: dict[int, str] = field(default_factory=dict)
    turns: list[tuple[str, str]] = field(default_factory=list)


def open_session(
    result: DiscoveryResult,
    candidate_index: int,
    paper_summary: str,
    evidence: Mapping[int, str] | None = None,
    session_id: str | None = None,
) -> ChatSession:
    if not 0 <= candidate_index < len(result.candidates):
        raise NoSuchCandidate(f"candidate {candidate_index} of {len(result.candidates)}")
    return ChatSession(
        session_id=session_id or uuid.uuid4().hex,
        claim_text=result.claim_text,
        paper_summary=paper_summary,
        candidate=result.candidates[candidate_index],
        evidence=dict(evidence or {}),
    )


def context_block(session: ChatSession) -> str:
    candidate = session.candidate
    record = candidate.record
    lines = [
        f"Manuscript summary:\n{session.paper_summary}",
        f"Claim under discussion:\n{session.claim_text}",
        f"Candidate paper: {record.title} ({record.repo}:{record.native_id}, "
        f"published {record.published.isoformat()})",
        f"Authors: {', '.join(record.authors) if record.authors else 'unknown'}",
    ]
    if record.abstract:
        lines.append(f"Abstract: {record.abstract}")
    if candidate.explanation:
        lines.append(f"Why it was suggested: {candidate.explanation}")
    if candidate.matches:
        quoted = []
        for match in candidate.matches:
            text = session.evidence.get(match.paragraph_index, "")
            quoted.append(f"[#{match.paragraph_index}, score {match.score:.2f}] {text}")
        lines.append("Matched paragraphs:\n" + "\n".join(quoted))
    if not candidate.verifiable:
        lines.append(
            "Note: the full text could not be verified; only metadata is available."
        )
    return "\n\n".join(lines)


def send_message(gateway: LlmGateway, session: ChatSession, user_text: str) -> str:
    text = user_text.strip()
    if not text:
        raise ValueError("message must be non-empty")
    history = tuple(session.turns[-CHAT_WINDOW_TURNS:])
    reply = gateway.complete_text(
        LlmRequest(
            TemplateId.CHAT,
            {"context_block": context_block(session), "question": text},
            history=history,
        )
    )
    session.turns.append(("user", text))
    session.turns.append(("assistant", reply))
    return reply
