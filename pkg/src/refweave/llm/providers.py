"""Completion providers: real HTTP endpoint, fixture-backed mock, scripted."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ..errors import ProviderUnreachable
from ..net import HttpClient, HttpRequest
from ..net.transport import TransportError
from .templates import TemplateId


@dataclass(frozen=True)
class ProviderCall:
    """One completion request, fully rendered plus its source variables."""

    template_id: TemplateId
    messages: tuple[tuple[str, str], ...]
    temperature: float
    max_tokens: int
    variables: dict[str, str] = field(default_factory=dict)


class LlmProvider(Protocol):
    def complete(self, call: ProviderCall) -> str: ...


def completion_payload(call: ProviderCall, model: str) -> bytes:
    """Byte-stable request body for a chat-completions endpoint."""
    payload = {
        "model": model,
        "messages": [{"role": role, "content": content} for role, content in call.messages],
        "temperature": call.temperature,
        "max_tokens": call.max_tokens,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")


class HttpLlmProvider:
    """Chat-completions endpoint speaking the common JSON wire shape."""

    def __init__(self, client: HttpClient, endpoint: str, model: str, api_key: str | None = None):
        self.client = client
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key

    def complete(self, call: ProviderCall) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        request = HttpRequest(
            "POST",
            self.endpoint,
            headers=headers,
            body=completion_payload(call, self.model),
            timeout=120.0,
        )
        try:
            response = self.client.send(request)
        except TransportError as exc:
            raise ProviderUnreachable(str(exc)) from exc
        if response.status != 200:
            raise ProviderUnreachable(
                f"completion endpoint returned {response.status}: "
                f"{response.body[:200].decode('utf-8', errors='replace')}"
            )
        try:
            parsed = json.loads(response.body)
            return parsed["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderUnreachable(f"malformed completion response: {exc}") from exc


class MockLlmProvider:
    """Replays canned completions keyed by a digest of the call variables.

    Looks for `<template>-<hash16>.txt` first, then `<template>-fallback.txt`.
    The exact-match file pins replies for known inputs; the fallback keeps
    template-level behaviour available for unanticipated inputs.
    """

    def __init__(self, fixtures_dir: Path | str):
        self.fixtures_dir = Path(fixtures_dir)

    @staticmethod
    def variables_hash(variables: dict[str, str]) -> str:
        canonical = json.dumps(variables, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def fixture_name(cls, template_id: TemplateId, variables: dict[str, str]) -> str:
        return f"{template_id.value.lower()}-{cls.variables_hash(variables)}.txt"

    @classmethod
    def fallback_name(cls, template_id: TemplateId) -> str:
        return f"{template_id.value.lower()}-fallback.txt"

    @classmethod
    def write_fixture(
        cls,
        fixtures_dir: Path | str,
        template_id: TemplateId,
        variables: dict[str, str] | None,
        text: str,
    ) -> Path:
        directory = Path(fixtures_dir)
        directory.mkdir(parents=True, exist_ok=True)
        name = (
            cls.fixture_name(template_id, variables)
            if variables is not None
            else cls.fallback_name(template_id)
        )
        path = directory / name
        path.write_text(text, encoding="utf-8")
        return path

    def complete(self, call: ProviderCall) -> str:
        exact = self.fixtures_dir / self.fixture_name(call.template_id, call.variables)
        if exact.exists():
            return exact.read_text(encoding="utf-8")
        fallback = self.fixtures_dir / self.fallback_name(call.template_id)
        if fallback.exists():
            return fallback.read_text(encoding="utf-8")
        raise ProviderUnreachable(
            f"no mock completion for {call.template_id.value} "
            f"(looked for {exact.name}, then {fallback.name} in {self.fixtures_dir})"
        )


class ScriptedLlmProvider:
    """Hands out a fixed sequence of replies; raises queued exceptions."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls: list[ProviderCall] = []

    def complete(self, call: ProviderCall) -> str:
        self.calls.append(call)
        if not self.replies:
            raise AssertionError("scripted provider ran out of replies")
        item = self.replies.pop(0)
        if isinstance(item, Exception):
            raise item
        return item
