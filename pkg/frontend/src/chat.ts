// Per-reference chat panel. Context chips show what the session was opened
// with; the transcript keeps every turn client-side even though the server
// windows its own history.

import type { ChatOpened, ServiceApi } from "./api";

export interface ContextChip {
  label: string;
  text: string;
}

export interface ChatTurn {
  role: "user" | "assistant";
  text: string;
}

export class ChatPanel {
  readonly sessionId: string;
  readonly chips: ContextChip[];
  readonly turns: ChatTurn[] = [];
  input = "";
  error: string | null = null;
  sending = false;

  constructor(
    private readonly api: ServiceApi,
    opened: ChatOpened,
    claimText: string,
  ) {
    this.sessionId = opened.session_id;
    this.chips = [
      { label: "Claim", text: claimText },
      { label: "Reference", text: opened.candidate_title },
    ];
  }

  canSend(): boolean {
    return !this.sending && this.input.trim().length > 0;
  }

  /** Send the current input. On failure the input is preserved and the
   * error shown inline; on success the input clears. */
  async send(): Promise<void> {
    if (!this.canSend()) return;
    const text = this.input.trim();
    this.sending = true;
    this.error = null;
    try {
      const response = await this.api.chat(this.sessionId, text);
      this.turns.push({ role: "user", text });
      this.turns.push({ role: "assistant", text: response.reply });
      this.input = "";
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.sending = false;
    }
  }
}
