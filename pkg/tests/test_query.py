import json
import random

import pytest

from refweave.errors import BatchShapeMismatch
from refweave.llm import LlmGateway, ScriptedLlmProvider
from refweave.manuscript import Claim, DocumentSchema
from refweave.query import (
    MAX_KEYWORDS,
    MAX_QUERY_CHARS,
    QueryVariant,
    build_queries,
    sanitize_keyword,
)


def schema(summary="Graph sketches\nCompact graph summaries.\nSections: Intro"):
    return DocumentSchema(
        title="Graph sketches",
        abstract="Compact graph summaries.",
        section_headings=("Intro",),
        summary=summary,
    )


def claims(*sentences):
    return [Claim(sentence=s, index_in_selection=i) for i, s in enumerate(sentences)]


def keyword_reply(*lists):
    return json.dumps({"keyword_lists": list(lists)})


class TestRawSentenceVariant:
    def test_no_model_calls_and_verbatim_query(self):
        queries = build_queries(
            None, claims("Graph sketches reduce memory usage."), schema(), "",
            QueryVariant.RAW_SENTENCE,
        )
        assert len(queries) == 1
        assert queries[0].query_string == "Graph sketches reduce memory usage."
        assert queries[0].keywords == ()
        assert queries[0].variant is QueryVariant.RAW_SENTENCE

    def test_long_sentence_clipped_to_limit(self):
        sentence = "word " * 200
        queries = build_queries(
            None, claims(sentence.strip()), schema(), "", QueryVariant.RAW_SENTENCE
        )
        assert 0 < len(queries[0].query_string) <= MAX_QUERY_CHARS


class TestKeywordVariants:
    def test_single_batched_call_for_many_claims(self):
        sentences = [f"Claim number {i} is about topic {i}." for i in range(7)]
        provider = ScriptedLlmProvider([keyword_reply(*[[f"topic {i}"] for i in range(7)])])
        queries = build_queries(
            LlmGateway(provider), claims(*sentences), schema(), "para",
            QueryVariant.KEYWORDS_ONLY,
        )
        assert len(provider.calls) == 1
        assert [q.claim_index for q in queries] == list(range(7))

    def test_one_call_regardless_of_claim_count(self):
        rng = random.Random(11)
        for _ in range(10):
            n = rng.randint(1, 50)
            provider = ScriptedLlmProvider([keyword_reply(*[["kw"]] * n)])
            build_queries(
                LlmGateway(provider),
                claims(*[f"Sentence {i}." for i in range(n)]),
                schema(), "", QueryVariant.KEYWORDS_ONLY,
            )
            assert len(provider.calls) == 1

    def test_keywords_only_omits_manuscript_context(self):
        provider = ScriptedLlmProvider([keyword_reply(["kw"])])
        build_queries(
            LlmGateway(provider), claims("One claim."), schema(), "the paragraph",
            QueryVariant.KEYWORDS_ONLY,
        )
        user = provider.calls[0].messages[-1][1]
        assert "Graph sketches" not in user
        assert "the paragraph" not in user

    def test_context_aware_includes_summary_and_paragraph(self):
        provider = ScriptedLlmProvider([keyword_reply(["kw"])])
        build_queries(
            LlmGateway(provider), claims("One claim."), schema(), "the paragraph",
            QueryVariant.CONTEXT_AWARE,
        )
        user = provider.calls[0].messages[-1][1]
        assert schema().summary in user
        assert "the paragraph" in user

    def test_batch_count_mismatch_exhausts_to_error(self):
        short = keyword_reply(["kw"])
        provider = ScriptedLlmProvider([short, short, short])
        with pytest.raises(BatchShapeMismatch):
            build_queries(
                LlmGateway(provider), claims("A.", "B."), schema(), "",
                QueryVariant.KEYWORDS_ONLY,
            )
        assert len(provider.calls) == 3

    def test_mismatch_then_correct_batch(self):
        provider = ScriptedLlmProvider([
            keyword_reply(["kw"]),
            keyword_reply(["kw one"], ["kw two"]),
        ])
        queries = build_queries(
            LlmGateway(provider), claims("A.", "B."), schema(), "",
            QueryVariant.KEYWORDS_ONLY,
        )
        assert [q.keywords for q in queries] == [("kw one",), ("kw two",)]

    def test_keyword_sanitisation(self):
        provider = ScriptedLlmProvider([
            keyword_reply(["transformer!", "self-attention (scaled)", "  spaced   out  ", "@@@"])
        ])
        queries = build_queries(
            LlmGateway(provider), claims("A."), schema(), "", QueryVariant.KEYWORDS_ONLY
        )
        assert queries[0].keywords == ("transformer", "self-attention scaled", "spaced out")
        assert queries[0].query_string == "transformer self-attention scaled spaced out"

    def test_keyword_cap(self):
        provider = ScriptedLlmProvider([keyword_reply([f"kw{i}" for i in range(15)])])
        queries = build_queries(
            LlmGateway(provider), claims("A."), schema(), "", QueryVariant.KEYWORDS_ONLY
        )
        assert len(queries[0].keywords) == MAX_KEYWORDS

    def test_all_junk_keywords_rejected_as_batch_error(self):
        junk = keyword_reply(["!!!", "???"])
        provider = ScriptedLlmProvider([junk, junk, junk])
        with pytest.raises(BatchShapeMismatch):
            build_queries(
                LlmGateway(provider), claims("A."), schema(), "", QueryVariant.KEYWORDS_ONLY
            )

    def test_query_string_clipped_but_nonempty(self):
        provider = ScriptedLlmProvider([keyword_reply([f"verylongkeyword{i}" for i in range(8)] )])
        long_schema = schema()
        queries = build_queries(
            LlmGateway(provider), claims("A."), long_schema, "", QueryVariant.KEYWORDS_ONLY
        )
        assert 0 < len(queries[0].query_string) <= MAX_QUERY_CHARS

    def test_empty_claims_short_circuit(self):
        assert build_queries(None, [], schema(), "", QueryVariant.CONTEXT_AWARE) == []


class TestSanitizeKeyword:
    @pytest.mark.parametrize(
        "raw, cleaned",
        [
            ("plain", "plain"),
            ("self-attention", "self-attention"),
            ("x_{i} math", "x i math"),
            ("  padded  ", "padded"),
            ("semi;colon,comma", "semi colon comma"),
            ("100% accuracy", "100 accuracy"),
            ("@@@", ""),
        ],
    )
    def test_cases(self, raw, cleaned):
        assert sanitize_keyword(raw) == cleaned
