"""Choose which preprint repositories to search for a batch of claims."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .llm import LlmGateway, LlmRequest, TemplateId
from .manuscript import Claim, DocumentSchema

REPOSITORIES = ("arxiv", "biorxiv", "medrxiv")
# When model confidence is low we always line up a second repository.
LOW_CONFIDENCE = 0.5


@dataclass(frozen=True)
class RoutingDecision:
    primary_repo: str
    secondary_repo: str
    confidence: float
    reasoning: str

    def __post_init__(self) -> None:
        if self.primary_repo not in REPOSITORIES:
            raise ValueError(f"unknown repository: {self.primary_repo!r}")
        if self.secondary_repo not in REPOSITORIES + ("none",):
            raise ValueError(f"unknown repository: {self.secondary_repo!r}")
        if self.secondary_repo == self.primary_repo:
            raise ValueError("secondary must differ from primary")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence out of range")


def _first_other(primary: str) -> str:
    for repo in REPOSITORIES:
        if repo != primary:
            return repo
    raise AssertionError("unreachable")


def claims_block(claims: Sequence[Claim]) -> str:
    return "\n".join(f"{claim.index_in_selection}. {claim.sentence}" for claim in claims)


def route_claims(
    gateway: LlmGateway, claims: Sequence[Claim], schema: DocumentSchema
) -> RoutingDecision:
    """One structured call, then deterministic cleanup of the model's choice.

    Cleanup rules: a secondary equal to the primary is replaced with the
    next repository in fixed order, and low confidence always gets a
    secondary so the search has somewhere to fall back to.
    """
    request = LlmRequest(
        TemplateId.ROUTE,
        {"schema_summary": schema.summary, "claims": claims_block(claims)},
    )
    reply = gateway.complete_structured(request)
    parsed = reply.parsed
    primary = parsed["primary_repo"]
    secondary = parsed["secondary_repo"]
    confidence = float(parsed["confidence"])
    if secondary == primary:
        secondary = _first_other(primary)
    if confidence < LOW_CONFIDENCE and secondary == "none":
        secondary = _first_other(primary)
    return RoutingDecision(
        primary_repo=primary,
        secondary_repo=secondary,
        confidence=confidence,
        reasoning=str(parsed["reasoning"]),
    )
