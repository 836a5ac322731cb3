"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class RefweaveError(Exception):
    """Base class for all engine errors."""


# --- manuscript ---

class MalformedLatex(RefweaveError):
    """No recognizable LaTeX structure; the UI should ask for a main file."""


class EmptySelection(RefweaveError):
    pass


class KeyBibMismatch(RefweaveError):
    """Cite key does not match the key of the supplied BibTeX entry."""


class BibParseError(RefweaveError):
    pass


# --- llm gateway ---

class ProviderUnreachable(RefweaveError):
    pass


class SchemaViolation(RefweaveError):
    """Structured output still invalid after all repair retries."""


class ProviderRefusal(RefweaveError):
    """Provider returned an empty completion."""


# --- routing / query ---

class InvalidRepoName(SchemaViolation):
    """Model named a repository outside the allowlist; treated as a schema violation."""


class BatchShapeMismatch(SchemaViolation):
    """Batched keyword call returned a list count different from the claim count."""


# --- repositories ---

class RepoUnavailable(RefweaveError):
    pass


class ResponseParseError(RefweaveError):
    pass


class BibUnavailable(RefweaveError):
    pass


# --- verification ---

class PdfUnavailable(RefweaveError):
    pass


class NotAPdf(RefweaveError):
    """Magic-bytes check failed: paywall or HTML interstitial, not a PDF."""


class GrobidUnavailable(RefweaveError):
    pass


class TeiParseError(RefweaveError):
    pass


class EmptyDocument(RefweaveError):
    pass


# --- matching ---

class NoParagraphs(RefweaveError):
    pass


# --- chat ---

class NoSuchCandidate(RefweaveError):
    pass


# --- service / transport ---

class EgressDenied(RefweaveError):
    """Outbound request to a host outside the allowlist."""


class FixtureMissing(RefweaveError):
    """Replay transport has no recorded response for this request."""


class ConfigError(RefweaveError):
    pass


# --- eval harness ---

class NoJudgments(RefweaveError):
    """Precision requested but no reference carries a relevance judgment."""


class InvalidJudgment(RefweaveError):
    """A reference was judged relevant without being valid."""
