// Result cards mirror the server's ranked candidates one-to-one: same
// order, same fields, at most three paragraph quotes. The client never
// re-scores or re-sorts.

import type { CandidatePayload, JobPayload } from "./api";

export type InsertState = "ready" | "inserted" | "conflict";

export interface ParagraphQuote {
  index: number;
  score: number;
  rationale: string;
  text: string;
}

export interface ResultCard {
  title: string;
  pdfUrl: string | null;
  abstract: string;
  authors: string[];
  published: string;
  relevance: number;
  verifiable: boolean;
  unverifiedReason: string | null;
  explanation: string;
  citeKey: string;
  quotes: ParagraphQuote[];
  topMatch: boolean;
  insertState: InsertState;
}

export const EMPTY_STATE = "No verifiable references found";

function toCard(candidate: CandidatePayload, topMatch: boolean): ResultCard {
  return {
    title: candidate.title,
    pdfUrl: candidate.pdf_url,
    abstract: candidate.abstract,
    authors: candidate.authors,
    published: candidate.published,
    relevance: candidate.overall_relevance,
    verifiable: candidate.verifiable,
    unverifiedReason: candidate.unverified_reason,
    explanation: candidate.explanation,
    citeKey: candidate.cite_key,
    quotes: candidate.matches.slice(0, 3).map((m) => ({
      index: m.paragraph_index,
      score: m.score,
      rationale: m.rationale,
      text: m.text,
    })),
    topMatch,
    insertState: "ready",
  };
}

export function cardsFromJob(job: JobPayload): ResultCard[] {
  if (!job.result) return [];
  const top = job.result.top;
  return job.result.candidates.map((candidate, index) => toCard(candidate, index === top));
}

export function panelHeadline(cards: ResultCard[]): string {
  if (cards.length === 0) return EMPTY_STATE;
  const plural = cards.length === 1 ? "reference" : "references";
  return `${cards.length} candidate ${plural}`;
}

/** Banner text for a failed job, naming the stage it died in. */
export function failureBanner(states: string[], error: string | null): string {
  const lastRunning = [...states].reverse().find((s) => s !== "failed") ?? "queued";
  const cause = error ? `: ${error}` : "";
  return `Discovery failed during ${lastRunning}${cause}`;
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderCard(card: ResultCard): string {
  const badge = card.topMatch ? '<span class="badge">Top match</span>' : "";
  const pdf = card.pdfUrl
    ? `<a class="pdf" href="${escapeHtml(card.pdfUrl)}" target="_blank" rel="noopener">PDF</a>`
    : '<span class="pdf missing">no PDF</span>';
  const verify = card.verifiable
    ? `<span class="score">relevance ${card.relevance.toFixed(2)}</span>`
    : `<span class="unverified">${escapeHtml(card.unverifiedReason ?? "unverified")}</span>`;
  const quotes = card.quotes
    .map(
      (q) =>
        `<blockquote data-paragraph="${q.index}">` +
        `<span class="qscore">[#${q.index}, ${q.score.toFixed(2)}]</span> ` +
        `${escapeHtml(q.text)}<footer>${escapeHtml(q.rationale)}</footer></blockquote>`,
    )
    .join("");
  const insertLabel =
    card.insertState === "inserted" ? "Inserted" : card.insertState === "conflict" ? "Re-run needed" : "Insert";
  return (
    `<article class="card${card.topMatch ? " top" : ""}">` +
    `<h3>${escapeHtml(card.title)}</h3>${badge}` +
    `<p class="meta">${escapeHtml(card.authors.join(", "))} · ${escapeHtml(card.published)} · ${pdf} · ${verify}</p>` +
    `<p class="abstract">${escapeHtml(card.abstract)}</p>` +
    `<p class="why">${escapeHtml(card.explanation)}</p>` +
    quotes +
    `<button class="insert" ${card.insertState === "ready" ? "" : "disabled "}data-state="${card.insertState}">${insertLabel}</button>` +
    `</article>`
  );
}
