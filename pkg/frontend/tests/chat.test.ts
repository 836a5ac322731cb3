import { describe, expect, it } from "vitest";

import { ApiError, ChatOpened, ChatReply, ServiceApi } from "../src/api";
import { ChatPanel } from "../src/chat";

const OPENED: ChatOpened = {
  session_id: "s1",
  context: "Claim: attention is enough\nReference: Attention estimators",
  candidate_title: "Attention estimators",
};

class ScriptedApi extends ServiceApi {
  sent: string[] = [];
  fail = false;

  constructor() {
    super("");
  }

  override async chat(_sessionId: string, message: string): Promise<ChatReply> {
    if (this.fail) throw new ApiError(502, "model endpoint unreachable");
    this.sent.push(message);
    return { reply: `about: ${message}`, turns: this.sent.length * 2 };
  }
}

describe("ChatPanel", () => {
  it("shows the claim and reference title as context chips", () => {
    const panel = new ChatPanel(new ScriptedApi(), OPENED, "attention is enough");
    expect(panel.chips).toEqual([
      { label: "Claim", text: "attention is enough" },
      { label: "Reference", text: "Attention estimators" },
    ]);
  });

  it("disables send on empty or whitespace input", () => {
    const panel = new ChatPanel(new ScriptedApi(), OPENED, "claim");
    expect(panel.canSend()).toBe(false);
    panel.input = "   ";
    expect(panel.canSend()).toBe(false);
    panel.input = "why this one?";
    expect(panel.canSend()).toBe(true);
  });

  it("sending appends both turns and clears the input", async () => {
    const panel = new ChatPanel(new ScriptedApi(), OPENED, "claim");
    panel.input = "why this one?";
    await panel.send();
    expect(panel.turns).toEqual([
      { role: "user", text: "why this one?" },
      { role: "assistant", text: "about: why this one?" },
    ]);
    expect(panel.input).toBe("");
    expect(panel.error).toBeNull();
  });

  it("a gateway failure shows inline and preserves the input", async () => {
    const api = new ScriptedApi();
    api.fail = true;
    const panel = new ChatPanel(api, OPENED, "claim");
    panel.input = "still here?";
    await panel.send();
    expect(panel.error).toContain("model endpoint unreachable");
    expect(panel.input).toBe("still here?");
    expect(panel.turns).toEqual([]);
  });

  it("the transcript keeps all turns past the server window", async () => {
    const panel = new ChatPanel(new ScriptedApi(), OPENED, "claim");
    for (let i = 1; i <= 11; i++) {
      panel.input = `question ${i}`;
      await panel.send();
    }
    expect(panel.turns).toHaveLength(22);
    expect(panel.turns[0]!.text).toBe("question 1");
    expect(panel.turns[20]!.text).toBe("question 11");
  });
});
