// Four-step flow controller: load a manuscript, select a span, discover
// with live progress, inspect cards, insert, chat. One discovery at a time;
// the server queues per manuscript and the UI disables the button besides.

import { ApiError, ServiceApi } from "./api";
import { cardsFromJob, failureBanner, ResultCard } from "./cards";
import { ChatPanel } from "./chat";
import { EditorModel } from "./editor";

export class App {
  readonly editor = new EditorModel();
  manuscriptId: string | null = null;
  revision = 0;
  jobId: string | null = null;
  claimText = "";
  stageLog: string[] = [];
  cards: ResultCard[] = [];
  banner: string | null = null;
  discovering = false;

  constructor(readonly api: ServiceApi) {}

  async loadManuscript(texSource: string, bibSource = ""): Promise<void> {
    const info = await this.api.loadManuscript(texSource, bibSource);
    this.manuscriptId = info.manuscript_id;
    this.revision = info.revision;
    this.editor.load(texSource, bibSource);
    this.cards = [];
    this.banner = null;
  }

  get discoverEnabled(): boolean {
    return this.manuscriptId !== null && !this.discovering;
  }

  /** Run discovery over the current selection, following the progress
   * stream and rendering cards (or a failure banner) at the end. */
  async discoverSelection(): Promise<void> {
    if (!this.manuscriptId) throw new Error("no manuscript loaded");
    if (this.discovering) throw new Error("a discovery is already running");
    this.discovering = true;
    this.banner = null;
    this.cards = [];
    this.stageLog = [];
    try {
      const span = this.editor.selectionScalars();
      const started = await this.api.discover(this.manuscriptId, span.start, span.end);
      this.jobId = started.job_id;
      const states = await this.api.jobStates(started.job_id, (s) => this.stageLog.push(s));
      const job = await this.api.job(started.job_id);
      if (job.state === "failed") {
        this.banner = failureBanner(states, job.error);
        return;
      }
      this.claimText = job.result?.claim_text ?? "";
      this.cards = cardsFromJob(job);
    } finally {
      this.discovering = false;
    }
  }

  /** Insert the card's citation; the buffers are replaced with the server's
   * sources. A revision conflict marks the card and asks for a re-run. */
  async insertCard(index: number): Promise<void> {
    const card = this.cards[index];
    if (!this.jobId || !card) throw new Error(`no card at index ${index}`);
    try {
      const result = await this.api.insert(this.jobId, index);
      this.editor.applyInsert(result.tex_source, result.bib_source, result.cite_key);
      this.revision = result.revision;
      card.insertState = "inserted";
      card.citeKey = result.cite_key;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        card.insertState = "conflict";
        this.banner = "Manuscript changed since this discovery ran; run it again";
        return;
      }
      throw err;
    }
  }

  async openChat(index: number): Promise<ChatPanel> {
    if (!this.jobId) throw new Error("no finished discovery");
    const opened = await this.api.openChat(this.jobId, index);
    return new ChatPanel(this.api, opened, this.claimText);
  }
}
