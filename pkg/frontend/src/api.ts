// The only layer that talks to the network. Everything goes to the local
// service; repositories and the model are never contacted from the browser.

import { readSseStates } from "./sse";

export interface ManuscriptInfo {
  manuscript_id: string;
  title: string;
  section_headings: string[];
  summary: string;
  revision: number;
}

export interface MatchPayload {
  paragraph_index: number;
  score: number;
  rationale: string;
  text: string;
}

export interface CandidatePayload {
  repo: string;
  native_id: string;
  title: string;
  authors: string[];
  abstract: string;
  pdf_url: string | null;
  published: string;
  verifiable: boolean;
  overall_relevance: number;
  cite_key: string;
  bibtex: string;
  bibtex_source: string;
  explanation: string;
  unverified_reason: string | null;
  provenance_id: string;
  matches: MatchPayload[];
}

export interface JobPayload {
  job_id: string;
  manuscript_id: string;
  state: string;
  error: string | null;
  error_kind: string | null;
  timings: Record<string, number>;
  selection: { start_offset: number; end_offset: number; text: string };
  result: {
    claim_text: string;
    created_at: string;
    top: number | null;
    trace: Record<string, unknown>;
    candidates: CandidatePayload[];
  } | null;
}

export interface InsertResult {
  cite_key: string;
  tex_source: string;
  bib_source: string;
  revision: number;
}

export interface ChatOpened {
  session_id: string;
  context: string;
  candidate_title: string;
}

export interface ChatReply {
  reply: string;
  turns: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ServiceApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  loadManuscript(texSource: string, bibSource = "", bibPath = "references.bib"): Promise<ManuscriptInfo> {
    return this.request("POST", "/api/manuscript", {
      tex_source: texSource,
      bib_source: bibSource,
      bib_path: bibPath,
    });
  }

  discover(manuscriptId: string, startOffset: number, endOffset: number): Promise<{ job_id: string }> {
    return this.request("POST", "/api/discover", {
      manuscript_id: manuscriptId,
      start_offset: startOffset,
      end_offset: endOffset,
    });
  }

  job(jobId: string): Promise<JobPayload> {
    return this.request("GET", `/api/jobs/${jobId}`);
  }

  /** Follow the job's progress stream; falls back to polling when the
   * stream cannot be read. Resolves with every state seen, in order. */
  async jobStates(jobId: string, onState?: (state: string) => void): Promise<string[]> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/api/jobs/${jobId}/events`);
      if (response.ok && response.body) {
        return await readSseStates(response.body, onState);
      }
    } catch {
      // fall through to polling
    }
    return this.pollStates(jobId, onState);
  }

  private async pollStates(jobId: string, onState?: (state: string) => void): Promise<string[]> {
    const states: string[] = [];
    for (;;) {
      const job = await this.job(jobId);
      if (states[states.length - 1] !== job.state) {
        states.push(job.state);
        onState?.(job.state);
      }
      if (job.state === "done" || job.state === "failed") return states;
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }

  insert(jobId: string, candidateIndex: number): Promise<InsertResult> {
    return this.request("POST", "/api/insert", {
      job_id: jobId,
      candidate_index: candidateIndex,
    });
  }

  openChat(jobId: string, candidateIndex: number): Promise<ChatOpened> {
    return this.request("POST", "/api/chat/open", {
      job_id: jobId,
      candidate_index: candidateIndex,
    });
  }

  chat(sessionId: string, message: string): Promise<ChatReply> {
    return this.request("POST", `/api/chat/${sessionId}`, { message });
  }

  health(): Promise<Record<string, unknown>> {
    return this.request("GET", "/api/health");
  }
}
