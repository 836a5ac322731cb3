from .latex import DocumentSchema, Selection, extract_schema, make_selection, normalize_ws
from .segment import DEFAULT_ABBREVIATIONS, Claim, segment_sentences
from .bibtex import BibEntry, append_entry, format_entry, parse_bibtex, parse_single_entry, rekey_entry
from .edit import Manuscript, insert_citation, resolve_cite_key

__all__ = [
    "DocumentSchema",
    "Selection",
    "extract_schema",
    "make_selection",
    "normalize_ws",
    "DEFAULT_ABBREVIATIONS",
    "Claim",
    "segment_sentences",
    "BibEntry",
    "parse_bibtex",
    "parse_single_entry",
    "format_entry",
    "rekey_entry",
    "append_entry",
    "Manuscript",
    "insert_citation",
    "resolve_cite_key",
]
