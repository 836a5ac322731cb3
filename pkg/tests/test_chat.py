from datetime import date, datetime, timezone

import pytest

from refweave.chat import CHAT_WINDOW_TURNS, context_block, open_session, send_message
from refweave.errors import NoSuchCandidate
from refweave.llm import LlmGateway, ScriptedLlmProvider
from refweave.matching import CandidateReference, DiscoveryResult, ParagraphMatch
from refweave.repositories import PaperRecord, arxiv_bibtex

NOW = datetime(2024, 5, 1, tzinfo=timezone.utc)


def result():
    record = PaperRecord(
        repo="arxiv", native_id="1706.03762", title="Attention Is All You Need",
        authors=("Ashish Vaswani",), abstract="Sequence transduction.",
        pdf_url=None, published=date(2017, 6, 12), provenance_id="prov",
    )
    candidate = CandidateReference(
        record=record, bibtex=arxiv_bibtex(record), verifiable=True,
        overall_relevance=0.9,
        matches=(ParagraphMatch(paragraph_index=2, score=0.9, rationale="direct"),),
        explanation="Paragraph #2 reports the effect.",
    )
    return DiscoveryResult(
        claim_text="Attention improves translation quality.",
        candidates=(candidate,), top=0, created_at=NOW,
    )


def session(evidence=None):
    return open_session(
        result(), 0, "My paper\nAbout attention.\nSections: Intro",
        evidence=evidence or {2: "The attention mechanism improves BLEU."},
        session_id="sess1",
    )


class TestOpenSession:
    def test_bad_index_rejected(self):
        with pytest.raises(NoSuchCandidate):
            open_session(result(), 3, "summary")
        with pytest.raises(NoSuchCandidate):
            open_session(result(), -1, "summary")

    def test_context_contains_grounding_material(self):
        block = context_block(session())
        assert "My paper" in block
        assert "Attention improves translation quality." in block
        assert "Attention Is All You Need" in block
        assert "The attention mechanism improves BLEU." in block
        assert "Paragraph #2 reports the effect." in block

    def test_unverifiable_candidate_flagged(self):
        res = result()
        unverified = CandidateReference(
            record=res.candidates[0].record, bibtex=res.candidates[0].bibtex,
            verifiable=False, overall_relevance=0.0, matches=(),
        )
        res2 = DiscoveryResult(
            claim_text=res.claim_text, candidates=(unverified,), top=0, created_at=NOW
        )
        block = context_block(open_session(res2, 0, "summary"))
        assert "could not be verified" in block


class TestSendMessage:
    def test_round_trip_appends_turns(self):
        provider = ScriptedLlmProvider(["It directly reports the improvement."])
        chat = session()
        reply = send_message(LlmGateway(provider), chat, "Does it support my claim?")
        assert reply == "It directly reports the improvement."
        assert chat.turns == [
            ("user", "Does it support my claim?"),
            ("assistant", "It directly reports the improvement."),
        ]
        # Context plus question reach the provider.
        user_payload = provider.calls[0].messages[-1][1]
        assert "Does it support my claim?" in user_payload
        assert "Attention Is All You Need" in user_payload

    def test_empty_message_rejected(self):
        chat = session()
        with pytest.raises(ValueError):
            send_message(LlmGateway(ScriptedLlmProvider([])), chat, "   ")
        assert chat.turns == []

    def test_history_window_is_bounded(self):
        provider = ScriptedLlmProvider([f"reply {i}" for i in range(12)])
        gateway = LlmGateway(provider)
        chat = session()
        for i in range(12):
            send_message(gateway, chat, f"question {i}")
        last_call = provider.calls[-1]
        history = [m for m in last_call.messages if m[0] in ("user", "assistant")]
        # Window of prior turns plus the current question.
        assert len(history) == CHAT_WINDOW_TURNS + 1
        assert history[0][1] in ("question 6", "reply 6")

    def test_sessions_are_isolated(self):
        provider = ScriptedLlmProvider(["a", "b"])
        gateway = LlmGateway(provider)
        first, second = session(), session(evidence={2: "Different quote."})
        send_message(gateway, first, "about the first")
        send_message(gateway, second, "about the second")
        assert len(first.turns) == 2 and len(second.turns) == 2
        # The second session's call must not carry the first session's turns.
        roles = [m[0] for m in provider.calls[1].messages]
        assert roles == ["system", "user"]
