"""Prompt templates and the JSON schemas their replies must satisfy.

Slots are spelled {{name}} and filled with plain string replacement, so
LaTeX braces and JSON braces in the variable values never confuse the
renderer.  Rendering fails loudly on missing variables or leftover slots.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class TemplateId(str, enum.Enum):
    ROUTE = "ROUTE"
    KEYWORDS = "KEYWORDS"
    MATCH_SCORE = "MATCH_SCORE"
    CHAT = "CHAT"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: TemplateId
    system: str
    user: str
    required_slots: tuple[str, ...]
    schema_id: str | None
    temperature: float
    max_tokens: int


_SLOT_RE = re.compile(r"\{\{([a-z_]+)\}\}")


def render_template(template: PromptTemplate, variables: dict[str, str]) -> tuple[str, str]:
    """Fill every slot; returns (system, user)."""
    missing = [slot for slot in template.required_slots if slot not in variables]
    if missing:
        raise KeyError(f"{template.template_id.value}: missing variables {missing}")
    system, user = template.system, template.user
    for name, value in variables.items():
        marker = "{{" + name + "}}"
        system = system.replace(marker, value)
        user = user.replace(marker, value)
    leftover = _SLOT_RE.findall(system) + _SLOT_RE.findall(user)
    if leftover:
        raise KeyError(f"{template.template_id.value}: unfilled slots {sorted(set(leftover))}")
    return system, user


ROUTE_SCHEMA = {
    "type": "object",
    "properties": {
        "primary_repo": {"type": "string", "enum": ["arxiv", "biorxiv", "medrxiv"]},
        "secondary_repo": {"type": "string", "enum": ["arxiv", "biorxiv", "medrxiv", "none"]},
        "confidence": {"type": "number", "minimum": 0, "maximum": 1},
        "reasoning": {"type": "string"},
    },
    "required": ["primary_repo", "secondary_repo", "confidence", "reasoning"],
}

KEYWORDS_SCHEMA = {
    "type": "object",
    "properties": {
        "keyword_lists": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 1,
            },
        }
    },
    "required": ["keyword_lists"],
}

MATCH_SCORE_SCHEMA = {
    "type": "object",
    "properties": {
        "scores": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "paragraph_index": {"type": "integer", "minimum": 0},
                    "score": {"type": "number"},
                    "rationale": {"type": "string", "minLength": 1},
                },
                "required": ["paragraph_index", "score", "rationale"],
            },
        }
    },
    "required": ["scores"],
}

SCHEMAS: dict[str, dict] = {
    "route": ROUTE_SCHEMA,
    "keywords": KEYWORDS_SCHEMA,
    "match_score": MATCH_SCORE_SCHEMA,
}


_ROUTE = PromptTemplate(
    template_id=TemplateId.ROUTE,
    system=(
        "You assign scientific claims to the preprint repository most likely to "
        "hold supporting literature. Available repositories: arxiv (physics, "
        "mathematics, computer science, quantitative biology, statistics), "
        "biorxiv (biology), medrxiv (health sciences and clinical medicine). "
        "Reply with JSON only, no prose around it."
    ),
    user=(
        "Manuscript overview:\n{{schema_summary}}\n\n"
        "Claims needing references:\n{{claims}}\n\n"
        "Choose the single best repository for these claims and, if another "
        "repository could plausibly help, name it as secondary; otherwise use "
        "\"none\". Reply with JSON of the form "
        '{"primary_repo": "...", "secondary_repo": "...", '
        '"confidence": 0.0, "reasoning": "..."} '
        "where confidence is your belief in the primary choice between 0 and 1."
    ),
    required_slots=("schema_summary", "claims"),
    schema_id="route",
    temperature=0.0,
    max_tokens=512,
)

_KEYWORDS = PromptTemplate(
    template_id=TemplateId.KEYWORDS,
    system=(
        "You turn scientific sentences into search keyword lists for a "
        "repository query engine. For each input sentence produce 3 to 8 "
        "keywords or short phrases that capture its technical content. "
        "Prefer domain terms over common words. Reply with JSON only."
    ),
    user=(
        "Manuscript overview (may be empty):\n{{schema_summary}}\n\n"
        "Paragraph surrounding the sentences (may be empty):\n"
        "{{surrounding_paragraph}}\n\n"
        "Sentences, one JSON string per line:\n{{sentences}}\n\n"
        "Reply with JSON of the form {\"keyword_lists\": [[...], ...]} "
        "containing exactly one keyword list per input sentence, in order."
    ),
    required_slots=("schema_summary", "surrounding_paragraph", "sentences"),
    schema_id="keywords",
    temperature=0.0,
    max_tokens=1024,
)

# Worked examples keep the scoring scale anchored across runs.
_MATCH_EXAMPLES = (
    "Example 1\n"
    "Claim: \"Dropout reduces overfitting in deep neural networks.\"\n"
    "Paragraph 0: \"We show that randomly omitting half of the feature "
    "detectors on each training case markedly reduces overfitting on small "
    "datasets.\"\n"
    "Good reply: {\"scores\": [{\"paragraph_index\": 0, \"score\": 0.95, "
    "\"rationale\": \"The paragraph reports exactly this regularising "
    "effect.\"}]}\n\n"
    "Example 2\n"
    "Claim: \"Transformers need less training time than recurrent models.\"\n"
    "Paragraph 0: \"Our model achieves state of the art quality after twelve "
    "hours of training on eight GPUs, a fraction of the cost of the best "
    "recurrent baselines.\"\n"
    "Good reply: {\"scores\": [{\"paragraph_index\": 0, \"score\": 0.8, "
    "\"rationale\": \"Supports the training-cost comparison, though hardware "
    "differs.\"}]}\n\n"
    "Example 3\n"
    "Claim: \"Gut microbiota composition influences drug metabolism.\"\n"
    "Paragraph 0: \"We catalogue codon usage bias across 2,000 bacterial "
    "genomes.\"\n"
    "Good reply: {\"scores\": [{\"paragraph_index\": 0, \"score\": 0.1, "
    "\"rationale\": \"Topic overlap is superficial; no metabolic evidence.\"}]}"
)

_MATCH_SCORE = PromptTemplate(
    template_id=TemplateId.MATCH_SCORE,
    system=(
        "You judge how strongly paragraphs from a candidate paper support a "
        "claim from a manuscript in progress. Score each paragraph from 0 "
        "(unrelated) to 1 (direct evidence). Reply with JSON only.\n\n"
        + _MATCH_EXAMPLES
    ),
    user=(
        "Claim:\n{{claim}}\n\n"
        "Context around the claim:\n{{surrounding_paragraph}}\n\n"
        "Candidate paper: {{candidate_title}}\n\n"
        "Paragraphs, each prefixed with its index:\n{{paragraphs}}\n\n"
        "Reply with JSON of the form {\"scores\": [{\"paragraph_index\": 0, "
        "\"score\": 0.0, \"rationale\": \"...\"}, ...]} covering every "
        "paragraph listed above."
    ),
    required_slots=("claim", "surrounding_paragraph", "candidate_title", "paragraphs"),
    schema_id="match_score",
    temperature=0.0,
    max_tokens=2048,
)

_CHAT = PromptTemplate(
    template_id=TemplateId.CHAT,
    system=(
        "You are a careful research assistant discussing one candidate "
        "reference with the author of a manuscript. Ground every statement "
        "in the context block; say so plainly when the context does not "
        "answer a question. Be concise."
    ),
    user="{{context_block}}\n\n{{question}}",
    required_slots=("context_block", "question"),
    schema_id=None,
    temperature=0.7,
    max_tokens=1024,
)

TEMPLATES: dict[TemplateId, PromptTemplate] = {
    TemplateId.ROUTE: _ROUTE,
    TemplateId.KEYWORDS: _KEYWORDS,
    TemplateId.MATCH_SCORE: _MATCH_SCORE,
    TemplateId.CHAT: _CHAT,
}
