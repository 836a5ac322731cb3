// Plain-textarea editor state. The buffer is the source of truth; the
// overlay highlight mirrors the selection in UTF-16 units while the server
// sees Unicode-scalar offsets via the conversion layer.

import { scalarToUtf16, utf16ToScalar } from "./offsets";

export interface HighlightRange {
  start: number;
  end: number;
}

export class EditorModel {
  buffer = "";
  bib = "";
  selectionStart = 0;
  selectionEnd = 0;
  cursor = 0;

  load(texSource: string, bibSource = ""): void {
    this.buffer = texSource;
    this.bib = bibSource;
    this.selectionStart = 0;
    this.selectionEnd = 0;
    this.cursor = 0;
  }

  /** Select the first occurrence of `needle`; offsets are UTF-16 units. */
  selectText(needle: string): HighlightRange {
    const at = this.buffer.indexOf(needle);
    if (at < 0) throw new Error(`text not found in buffer: ${needle.slice(0, 40)}...`);
    return this.select(at, at + needle.length);
  }

  select(start: number, end: number): HighlightRange {
    if (start < 0 || end > this.buffer.length || start >= end) {
      throw new RangeError(`bad selection [${start}, ${end})`);
    }
    this.selectionStart = start;
    this.selectionEnd = end;
    this.cursor = end;
    return this.highlight();
  }

  highlight(): HighlightRange {
    return { start: this.selectionStart, end: this.selectionEnd };
  }

  selectedText(): string {
    return this.buffer.slice(this.selectionStart, this.selectionEnd);
  }

  /** The selection in the server's unit, Unicode scalar values. */
  selectionScalars(): { start: number; end: number } {
    return {
      start: utf16ToScalar(this.buffer, this.selectionStart),
      end: utf16ToScalar(this.buffer, this.selectionEnd),
    };
  }

  /** Replace both buffers with the server-returned sources after an insert
   * and park the cursor right after the new marker. */
  applyInsert(texSource: string, bibSource: string, citeKey: string): void {
    const marker = `~\\cite{${citeKey}}`;
    const searchFrom = Math.min(this.selectionStart, texSource.length);
    let at = texSource.indexOf(marker, searchFrom);
    if (at < 0) at = texSource.indexOf(marker);
    this.buffer = texSource;
    this.bib = bibSource;
    this.cursor = at >= 0 ? at + marker.length : this.selectionEnd;
  }

  /** Cursor position in scalar units, for callers mirroring the server. */
  cursorScalar(): number {
    return utf16ToScalar(this.buffer, this.cursor);
  }

  /** Map a server-side scalar span back to UTF-16 for the overlay. */
  highlightFromScalars(start: number, end: number): HighlightRange {
    return this.select(
      scalarToUtf16(this.buffer, start),
      scalarToUtf16(this.buffer, end),
    );
  }
}
