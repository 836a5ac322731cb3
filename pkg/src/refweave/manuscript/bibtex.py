"""Minimal BibTeX reading and writing.

Covers the subset this engine produces and consumes: @type{key, field = value}
entries with brace- or quote-delimited values. @comment/@string/@preamble
blocks are skipped. Entries are never reordered; appends go to the end with
one blank line between entries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import BibParseError

_ENTRY_HEAD_RE = re.compile(r"@\s*([A-Za-z]+)\s*\{")
_NON_ENTRY_TYPES = {"comment", "string", "preamble"}


@dataclass
class BibEntry:
    entry_type: str
    key: str
    raw: str
    fields: dict[str, str] = field(default_factory=dict)


def _find_closing_brace(text: str, open_idx: int) -> int:
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
                return i
        i += 1
    raise BibParseError("unbalanced braces in BibTeX entry")


def _parse_fields(body: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    i = 0
    n = len(body)
    while i < n:
        while i < n and (body[i].isspace() or body[i] == ","):
            i += 1
        if i >= n:
            break
        name_start = i
        while i < n and body[i] not in "=,{}" and not body[i].isspace():
            i += 1
        name = body[name_start:i].strip().lower()
        while i < n and body[i].isspace():
            i += 1
        if i >= n or body[i] != "=":
            if name:
                raise BibParseError(f"expected '=' after field name {name!r}")
            break
        i += 1
        while i < n and body[i].isspace():
            i += 1
        if i >= n:
            raise BibParseError(f"missing value for field {name!r}")
        if body[i] == "{":
            end = _find_closing_brace(body, i)
            value = body[i + 1 : end]
            i = end + 1
        elif body[i] == '"':
            j = i + 1
            while j < n and body[j] != '"':
                j += 2 if body[j] == "\\" else 1
            if j >= n:
                raise BibParseError(f"unterminated quoted value for field {name!r}")
            value = body[i + 1 : j]
            i = j + 1
        else:
            j = i
            while j < n and body[j] != ",":
                j += 1
            value = body[i:j].strip()
            i = j
        fields[name] = " ".join(value.split())
    return fields


def parse_bibtex(text: str) -> list[BibEntry]:
    """Parse all entries, in file order."""
    entries: list[BibEntry] = []
    pos = 0
    while True:
        m = _ENTRY_HEAD_RE.search(text, pos)
        if m is None:
            break
        entry_type = m.group(1).lower()
        open_idx = m.end() - 1
        close_idx = _find_closing_brace(text, open_idx)
        raw = text[m.start() : close_idx + 1]
        pos = close_idx + 1
        if entry_type in _NON_ENTRY_TYPES:
            continue
        body = text[m.end() : close_idx]
        comma = body.find(",")
        if comma < 0:
            raise BibParseError(f"entry @{entry_type} has no key")
        key = body[:comma].strip()
        if not key:
            raise BibParseError(f"entry @{entry_type} has an empty key")
        fields = _parse_fields(body[comma + 1 :])
        entries.append(BibEntry(entry_type=entry_type, key=key, raw=raw, fields=fields))
    return entries


def parse_single_entry(text: str) -> BibEntry:
    entries = parse_bibtex(text)
    if len(entries) != 1:
        raise BibParseError(f"expected exactly one BibTeX entry, found {len(entries)}")
    return entries[0]


def format_entry(entry_type: str, key: str, fields: dict[str, str]) -> str:
    lines = [f"@{entry_type}{{{key},"]
    for name, value in fields.items():
        lines.append(f"  {name} = {{{value}}},")
    lines.append("}")
    return "\n".join(lines)


def rekey_entry(raw: str, new_key: str) -> str:
    """Rewrite the entry key in place, preserving everything else."""
    m = _ENTRY_HEAD_RE.search(raw)
    if m is None:
        raise BibParseError("not a BibTeX entry")
    close = _find_closing_brace(raw, m.end() - 1)
    comma = raw.find(",", m.end(), close)
    if comma < 0:
        raise BibParseError("entry has no key to rewrite")
    return raw[: m.end()] + new_key + raw[comma:]


def append_entry(bib_source: str, entry_raw: str) -> str:
    entry_raw = entry_raw.strip()
    if not bib_source.strip():
        return entry_raw + "\n"
    return bib_source.rstrip("\n") + "\n\n" + entry_raw + "\n"
