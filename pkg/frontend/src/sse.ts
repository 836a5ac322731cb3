// Minimal server-sent-events reader for the job progress stream.
// The service emits `event: state` records with a JSON body and a final
// `event: end`; chunk boundaries can land anywhere, so parsing is
// buffer-based rather than line-based per chunk.

export interface SseEvent {
  event: string;
  data: string;
}

export function parseSseChunk(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  let rest = buffer;
  for (;;) {
    const boundary = rest.indexOf("\n\n");
    if (boundary < 0) break;
    const block = rest.slice(0, boundary);
    rest = rest.slice(boundary + 2);
    let event = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("event:")) event = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    if (dataLines.length > 0 || event !== "message") {
      events.push({ event, data: dataLines.join("\n") });
    }
  }
  return { events, rest };
}

/** Read a job progress stream to completion, returning each state in order.
 * Stops at `event: end` or when the stream closes. */
export async function readSseStates(
  body: ReadableStream<Uint8Array>,
  onState?: (state: string) => void,
): Promise<string[]> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  const states: string[] = [];
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { events, rest } = parseSseChunk(buffer);
      buffer = rest;
      for (const item of events) {
        if (item.event === "end") return states;
        if (item.event === "state") {
          const parsed = JSON.parse(item.data) as { state: string };
          states.push(parsed.state);
          onState?.(parsed.state);
        }
      }
    }
  } finally {
    reader.releaseLock();
  }
  return states;
}
