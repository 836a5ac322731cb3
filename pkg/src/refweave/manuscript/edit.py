"""Citation insertion and manuscript state.

The in-text marker goes at the end of the selected span; when the span ends
in sentence punctuation ('.', ',' or ';') the marker slips in front of it so
the typeset result reads "...claim~\\cite{key}." rather than "...claim.~\\cite{key}".
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, replace

from ..errors import KeyBibMismatch
from .bibtex import BibEntry, append_entry, parse_bibtex, parse_single_entry, rekey_entry
from .latex import DocumentSchema, Selection, extract_schema

CITE_KEY_RE = re.compile(r"^[A-Za-z0-9_:+-]+$")
_TRAILING_PUNCT = ".,;"


@dataclass(frozen=True)
class Manuscript:
    """The author's LaTeX project at a fixed revision (the editing context)."""

    tex_source: str
    bib_path: str
    bib_source: str
    schema: DocumentSchema
    revision: int = 0

    @classmethod
    def load(cls, tex_source: str, bib_path: str = "references.bib", bib_source: str = "") -> "Manuscript":
        return cls(
            tex_source=tex_source,
            bib_path=bib_path,
            bib_source=bib_source,
            schema=extract_schema(tex_source),
            revision=0,
        )


def _suffix_candidates(key: str):
    yield key
    for letter in string.ascii_lowercase:
        yield f"{key}-{letter}"
    for first in string.ascii_lowercase:
        for second in string.ascii_lowercase:
            yield f"{key}-{first}{second}"


def _resolve_key(existing: list[BibEntry], key: str, new_raw: str) -> tuple[str, bool]:
    """Pick the key to use and whether the entry must be appended.

    Byte-identical re-insertion is a no-op on the bib file; a different entry
    owning the key pushes the new one to the next free '-a', '-b', ... suffix.
    """
    by_key = {e.key: e for e in existing}
    for candidate in _suffix_candidates(key):
        owner = by_key.get(candidate)
        if owner is None:
            return candidate, True
        candidate_raw = new_raw if candidate == key else rekey_entry(new_raw, candidate)
        if owner.raw.strip() == candidate_raw.strip():
            return candidate, False
    raise KeyBibMismatch(f"no free key derivable from {key!r}")


def resolve_cite_key(manuscript: Manuscript, cite_key: str, bibtex: str) -> str:
    """The key insert_citation would put in the marker, collisions resolved."""
    entry = parse_single_entry(bibtex)
    if entry.key != cite_key:
        raise KeyBibMismatch(
            f"cite key {cite_key!r} does not match BibTeX entry key {entry.key!r}"
        )
    final_key, _ = _resolve_key(parse_bibtex(manuscript.bib_source), cite_key, entry.raw)
    return final_key


def insert_citation(
    manuscript: Manuscript, selection: Selection, cite_key: str, bibtex: str
) -> Manuscript:
    """Insert `~\\cite{<key>}` at the end of the span and append the entry.

    Returns a new Manuscript with the revision bumped. The bib file gains the
    entry only if no entry with that key exists yet; key collisions with a
    different entry are resolved by suffixing, applied to marker and entry both.
    """
    if not manuscript.tex_source:
        raise ValueError("manuscript has no source loaded")
    if not CITE_KEY_RE.match(cite_key):
        raise KeyBibMismatch(f"invalid cite key {cite_key!r}")
    entry = parse_single_entry(bibtex)
    if entry.key != cite_key:
        raise KeyBibMismatch(
            f"cite key {cite_key!r} does not match BibTeX entry key {entry.key!r}"
        )
    if selection.end_offset > len(manuscript.tex_source) or (
        manuscript.tex_source[selection.start_offset : selection.end_offset]
        != selection.text
    ):
        raise ValueError("selection does not match the manuscript source")

    existing = parse_bibtex(manuscript.bib_source)
    final_key, needs_append = _resolve_key(existing, cite_key, entry.raw)

    final_raw = entry.raw if final_key == cite_key else rekey_entry(entry.raw, final_key)
    new_bib = (
        append_entry(manuscript.bib_source, final_raw)
        if needs_append
        else manuscript.bib_source
    )

    pos = selection.end_offset
    if selection.text and selection.text[-1] in _TRAILING_PUNCT:
        pos -= 1
    marker = f"~\\cite{{{final_key}}}"
    new_tex = manuscript.tex_source[:pos] + marker + manuscript.tex_source[pos:]

    return replace(
        manuscript,
        tex_source=new_tex,
        bib_source=new_bib,
        schema=extract_schema(new_tex),
        revision=manuscript.revision + 1,
    )
