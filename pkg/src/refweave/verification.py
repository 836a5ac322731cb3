"""Full-text verification: fetch the PDF, run it through GROBID, index the TEI.

A candidate that survives this stage carries a parsed document whose
paragraphs can be quoted back to the user; one that does not is kept but
marked unverifiable.
"""

from __future__ import annotations

import hashlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import EmptyDocument, GrobidUnavailable, NotAPdf, PdfUnavailable, TeiParseError
from .net import HttpClient, HttpRequest
from .net.transport import TransportError
from .repositories import PaperRecord

PDF_MAGIC = b"%PDF"
MAX_PDF_BYTES = 30 * 1024 * 1024

TEI_NS = {"tei": "http://www.tei-c.org/ns/1.0"}

# Fixed boundary keeps the multipart body byte-stable for replay keying.
_MULTIPART_BOUNDARY = "refweave-grobid-upload"


@dataclass(frozen=True)
class ParagraphRef:
    global_index: int
    section_ordinal: int
    text: str


@dataclass(frozen=True)
class ParsedDocument:
    native_id: str
    sections: tuple[tuple[str, tuple[str, ...]], ...]
    paragraphs: tuple[ParagraphRef, ...]
    tei_digest: str
    pdf_provenance_id: str | None = None

    def paragraph_text(self, global_index: int) -> str:
        return self.paragraphs[global_index].text


def candidate_pdf_urls(record: PaperRecord) -> list[str]:
    urls = []
    if record.pdf_url:
        urls.append(record.pdf_url)
    if record.repo == "arxiv":
        constructed = f"https://arxiv.org/pdf/{record.native_id}"
        if constructed not in urls:
            urls.append(constructed)
    return urls


def acquire_pdf(
    client: HttpClient, record: PaperRecord, max_bytes: int = MAX_PDF_BYTES
) -> tuple[bytes, str]:
    """Returns (pdf bytes, provenance id of the stored response).

    A 200 body that is not a PDF means a landing page or paywall stub;
    that is NotAPdf, not a retryable miss.
    """
    urls = candidate_pdf_urls(record)
    if not urls:
        raise PdfUnavailable(f"{record.native_id} has no PDF location")
    last_status: int | None = None
    for url in urls:
        try:
            response = client.send(HttpRequest("GET", url))
        except TransportError:
            last_status = None
            continue
        last_status = response.status
        if response.status != 200:
            continue
        if not response.body.startswith(PDF_MAGIC):
            raise NotAPdf(f"{url} did not return a PDF")
        if len(response.body) > max_bytes:
            raise PdfUnavailable(f"{url} exceeds the {max_bytes} byte cap")
        assert response.store_key is not None
        return response.body, response.store_key
    raise PdfUnavailable(
        f"no PDF for {record.native_id} (last status {last_status})"
    )


def _multipart_pdf(pdf: bytes) -> tuple[bytes, str]:
    head = (
        f"--{_MULTIPART_BOUNDARY}\r\n"
        'Content-Disposition: form-data; name="input"; filename="upload.pdf"\r\n'
        "Content-Type: application/pdf\r\n\r\n"
    ).encode("ascii")
    tail = f"\r\n--{_MULTIPART_BOUNDARY}--\r\n".encode("ascii")
    content_type = f"multipart/form-data; boundary={_MULTIPART_BOUNDARY}"
    return head + pdf + tail, content_type


class GrobidClient:
    def __init__(self, client: HttpClient, base_url: str):
        self.client = client
        self.base_url = base_url.rstrip("/")

    def process_fulltext(self, pdf: bytes) -> bytes:
        body, content_type = _multipart_pdf(pdf)
        request = HttpRequest(
            "POST",
            f"{self.base_url}/api/processFulltextDocument",
            headers={"Content-Type": content_type, "Accept": "application/xml"},
            body=body,
            replay_extra=hashlib.sha256(pdf).digest(),
            timeout=120.0,
        )
        try:
            response = self.client.send(request)
        except TransportError as exc:
            raise GrobidUnavailable(f"fulltext processing failed: {exc}") from exc
        if response.status != 200:
            raise GrobidUnavailable(f"fulltext processing returned {response.status}")
        return response.body


def _element_text(element) -> str:
    return " ".join("".join(element.itertext()).split())


def parse_tei(tei: bytes, native_id: str, pdf_provenance_id: str | None = None) -> ParsedDocument:
    """Body divisions become sections; their p children become paragraphs.

    Paragraph indices are dense over the whole document so scoring output
    can name a paragraph unambiguously.
    """
    try:
        root = ET.fromstring(tei)
    except ET.ParseError as exc:
        raise TeiParseError(f"bad TEI: {exc}") from exc
    body = root.find(".//tei:text/tei:body", TEI_NS)
    if body is None:
        raise TeiParseError("TEI has no text body")
    sections: list[tuple[str, tuple[str, ...]]] = []
    paragraphs: list[ParagraphRef] = []
    for ordinal, div in enumerate(body.findall("tei:div", TEI_NS)):
        head = div.find("tei:head", TEI_NS)
        heading = _element_text(head) if head is not None else ""
        texts: list[str] = []
        for p in div.findall("tei:p", TEI_NS):
            text = _element_text(p)
            if not text:
                continue
            paragraphs.append(
                ParagraphRef(global_index=len(paragraphs), section_ordinal=ordinal, text=text)
            )
            texts.append(text)
        sections.append((heading, tuple(texts)))
    if not paragraphs:
        raise EmptyDocument(f"no usable paragraphs for {native_id}")
    return ParsedDocument(
        native_id=native_id,
        sections=tuple(sections),
        paragraphs=tuple(paragraphs),
        tei_digest=hashlib.sha256(tei).hexdigest(),
        pdf_provenance_id=pdf_provenance_id,
    )


def tei_body_text(tei: bytes) -> str:
    """Whitespace-normalised text of the TEI body, for containment checks."""
    root = ET.fromstring(tei)
    body = root.find(".//tei:text/tei:body", TEI_NS)
    if body is None:
        return ""
    return _element_text(body)


def verify_fulltext(
    client: HttpClient, grobid: GrobidClient, record: PaperRecord
) -> ParsedDocument:
    pdf, provenance = acquire_pdf(client, record)
    tei = grobid.process_fulltext(pdf)
    return parse_tei(tei, record.native_id, pdf_provenance_id=provenance)
