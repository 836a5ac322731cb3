"""Schema-validated completions with bounded self-repair.

A structured call renders its template, asks the provider, and checks the
reply against the template's JSON schema plus an optional extra validator.
Invalid replies earn up to two repair rounds in which the model sees its
own output and the validation error; after that the last validation error
propagates unchanged so callers can branch on its type.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import jsonschema

from ..errors import ProviderRefusal, SchemaViolation
from .providers import LlmProvider, ProviderCall
from .templates import SCHEMAS, TEMPLATES, TemplateId, render_template

REPAIR_ROUNDS = 2

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)\s*```", re.DOTALL)


def extract_json(text: str) -> Any:
    """Parse a JSON object out of a completion, tolerating fences and prose."""
    candidates = [text.strip()]
    fenced = _FENCE_RE.search(text)
    if fenced:
        candidates.append(fenced.group(1))
    start, end = text.find("{"), text.rfind("}")
    if start != -1 and end > start:
        candidates.append(text[start : end + 1])
    for candidate in candidates:
        try:
            return json.loads(candidate)
        except ValueError:
            continue
    raise SchemaViolation("completion is not parseable JSON")


@dataclass(frozen=True)
class LlmRequest:
    template_id: TemplateId
    variables: dict[str, str]
    history: tuple[tuple[str, str], ...] = ()
    temperature: float | None = None
    max_tokens: int | None = None


@dataclass(frozen=True)
class StructuredReply:
    parsed: dict
    raw_text: str
    attempts: int


class LlmGateway:
    def __init__(self, provider: LlmProvider, repair_rounds: int = REPAIR_ROUNDS):
        self.provider = provider
        self.repair_rounds = repair_rounds

    def _base_call(self, request: LlmRequest) -> ProviderCall:
        template = TEMPLATES[request.template_id]
        system, user = render_template(template, request.variables)
        messages: list[tuple[str, str]] = [("system", system)]
        messages.extend(request.history)
        messages.append(("user", user))
        return ProviderCall(
            template_id=request.template_id,
            messages=tuple(messages),
            temperature=request.temperature if request.temperature is not None else template.temperature,
            max_tokens=request.max_tokens if request.max_tokens is not None else template.max_tokens,
            variables=dict(request.variables),
        )

    def complete_text(self, request: LlmRequest) -> str:
        call = self._base_call(request)
        text = self.provider.complete(call)
        if not text.strip():
            raise ProviderRefusal(f"empty completion for {request.template_id.value}")
        return text.strip()

    def complete_structured(
        self,
        request: LlmRequest,
        extra_validator: Callable[[dict], None] | None = None,
    ) -> StructuredReply:
        template = TEMPLATES[request.template_id]
        if template.schema_id is None:
            raise ValueError(f"{request.template_id.value} has no reply schema")
        schema = SCHEMAS[template.schema_id]
        call = self._base_call(request)
        last_error: SchemaViolation | None = None
        attempts = 0
        for _ in range(1 + self.repair_rounds):
            attempts += 1
            text = self.provider.complete(call)
            if not text.strip():
                raise ProviderRefusal(f"empty completion for {request.template_id.value}")
            try:
                parsed = extract_json(text)
                jsonschema.validate(parsed, schema)
                if extra_validator is not None:
                    extra_validator(parsed)
                return StructuredReply(parsed=parsed, raw_text=text, attempts=attempts)
            except jsonschema.ValidationError as exc:
                last_error = SchemaViolation(exc.message)
            except SchemaViolation as exc:
                last_error = exc
            repair = (
                "Your previous reply was rejected: "
                f"{last_error}. Reply again with only valid JSON matching the "
                "requested shape, nothing else."
            )
            call = ProviderCall(
                template_id=call.template_id,
                messages=call.messages + (("assistant", text), ("user", repair)),
                temperature=call.temperature,
                max_tokens=call.max_tokens,
                variables=call.variables,
            )
        assert last_error is not None
        raise last_error
