"""LaTeX source handling: document schema extraction and selection context.

The schema (title, abstract, section headings, summary) is derived purely
from the `.tex` text by deterministic rules, with no model calls and no
network, so the manuscript summary fed to downstream prompts is reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MalformedLatex

SUMMARY_MAX_CHARS = 2000

_SECTION_RE = re.compile(r"\\(section|subsection)\*?\s*\{")
_TITLE_RE = re.compile(r"\\title\s*(?:\[[^\]]*\])?\s*\{")
_BEGIN_DOC_RE = re.compile(r"\\begin\s*\{document\}")
_ABSTRACT_RE = re.compile(
    r"\\begin\s*\{abstract\}(.*?)\\end\s*\{abstract\}", re.DOTALL
)


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


def strip_comments(tex: str) -> str:
    """Drop unescaped %-comments, keeping line structure intact."""
    out_lines = []
    for line in tex.split("\n"):
        cut = len(line)
        i = 0
        while i < len(line):
            ch = line[i]
            if ch == "\\":
                i += 2
                continue
            if ch == "%":
                cut = i
                break
            i += 1
        out_lines.append(line[:cut])
    return "\n".join(out_lines)


def _read_balanced(text: str, open_idx: int) -> str | None:
    """Content of the brace group opening at text[open_idx] == '{'."""
    depth = 0
    i = open_idx
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[open_idx + 1 : i]
        i += 1
    return None


@dataclass(frozen=True)
class DocumentSchema:
    """Deterministic digest of the manuscript: title, abstract, headings, summary."""

    title: str
    abstract: str
    section_headings: tuple[str, ...]
    summary: str


@dataclass(frozen=True)
class Selection:
    """A highlighted span of the LaTeX source, with its enclosing paragraph.

    Offsets count Unicode scalar values (Python string indices), start
    inclusive, end exclusive.
    """

    start_offset: int
    end_offset: int
    text: str
    surrounding_paragraph: str

    def __post_init__(self) -> None:
        if not (0 <= self.start_offset < self.end_offset):
            raise ValueError(
                f"invalid selection offsets [{self.start_offset}, {self.end_offset})"
            )


def make_selection(tex_source: str, start: int, end: int) -> Selection:
    """Build a Selection over tex_source, deriving text and paragraph context."""
    if not (0 <= start < end <= len(tex_source)):
        raise ValueError(
            f"selection [{start}, {end}) out of range for source of length {len(tex_source)}"
        )
    text = tex_source[start:end]
    # Enclosing paragraph: bounded by blank lines.
    para_start = 0
    for m in re.finditer(r"\n\s*\n", tex_source[:start]):
        para_start = m.end()
    m = re.search(r"\n\s*\n", tex_source[end:])
    para_end = end + m.start() if m else len(tex_source)
    paragraph = normalize_ws(tex_source[para_start:para_end])
    return Selection(start, end, text, paragraph)


def extract_schema(tex_source: str) -> DocumentSchema:
    """Extract title/abstract/headings and build the bounded summary.

    Raises MalformedLatex when the source has none of \\title, \\(sub)section,
    or \\begin{document}; that is the signal for the UI to ask for a main file.
    """
    stripped = strip_comments(tex_source)

    title_m = _TITLE_RE.search(stripped)
    has_sections = _SECTION_RE.search(stripped) is not None
    if title_m is None and not has_sections and _BEGIN_DOC_RE.search(stripped) is None:
        raise MalformedLatex("no \\title, \\section or \\begin{document} found")

    if title_m is not None:
        inner = _read_balanced(stripped, title_m.end() - 1)
        title = normalize_ws(inner or "")
    else:
        title = ""
    if not title:
        for line in stripped.split("\n"):
            if line.strip():
                title = normalize_ws(line)
                break

    abstract_m = _ABSTRACT_RE.search(stripped)
    abstract = normalize_ws(abstract_m.group(1)) if abstract_m else ""

    headings: list[str] = []
    for m in _SECTION_RE.finditer(stripped):
        inner = _read_balanced(stripped, m.end() - 1)
        if inner is not None:
            headings.append(normalize_ws(inner))

    parts = [title]
    if abstract:
        parts.append(abstract)
    if headings:
        parts.append("Sections: " + "; ".join(headings))
    summary = "\n".join(parts)[:SUMMARY_MAX_CHARS]

    return DocumentSchema(
        title=title,
        abstract=abstract,
        section_headings=tuple(headings),
        summary=summary,
    )
