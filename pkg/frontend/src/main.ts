// Browser bootstrap: binds the flow controller to a plain textarea with a
// highlight overlay, a cards column, and a chat drawer. Everything below is
// wiring; the logic lives in the modules it imports.

import { ServiceApi } from "./api";
import { App } from "./app";
import { panelHeadline, renderCard } from "./cards";
import type { ChatPanel } from "./chat";

const api = new ServiceApi("");
const app = new App(api);

const tex = document.querySelector<HTMLTextAreaElement>("#tex")!;
const bib = document.querySelector<HTMLTextAreaElement>("#bib")!;
const overlay = document.querySelector<HTMLDivElement>("#overlay")!;
const discoverButton = document.querySelector<HTMLButtonElement>("#discover")!;
const stages = document.querySelector<HTMLDivElement>("#stages")!;
const cardsBox = document.querySelector<HTMLDivElement>("#cards")!;
const bannerBox = document.querySelector<HTMLDivElement>("#banner")!;
const chatBox = document.querySelector<HTMLDivElement>("#chat")!;

let activeChat: ChatPanel | null = null;

function syncOverlay(): void {
  const { start, end } = app.editor.highlight();
  const before = tex.value.slice(0, start);
  const selected = tex.value.slice(start, end);
  overlay.textContent = "";
  overlay.append(before, Object.assign(document.createElement("mark"), { textContent: selected }));
}

function render(): void {
  discoverButton.disabled = !app.discoverEnabled;
  stages.textContent = app.stageLog.join(" → ");
  bannerBox.textContent = app.banner ?? "";
  bannerBox.hidden = app.banner === null;
  cardsBox.innerHTML =
    `<p class="headline">${panelHeadline(app.cards)}</p>` +
    app.cards.map(renderCard).join("");
  cardsBox.querySelectorAll<HTMLButtonElement>("button.insert").forEach((button, index) => {
    button.addEventListener("click", async () => {
      await app.insertCard(index);
      tex.value = app.editor.buffer;
      bib.value = app.editor.bib;
      tex.setSelectionRange(app.editor.cursor, app.editor.cursor);
      render();
    });
    button.insertAdjacentHTML(
      "afterend",
      '<button class="chat-open">Discuss</button>',
    );
  });
  cardsBox.querySelectorAll<HTMLButtonElement>("button.chat-open").forEach((button, index) => {
    button.addEventListener("click", async () => {
      activeChat = await app.openChat(index);
      renderChat();
    });
  });
}

function renderChat(): void {
  if (!activeChat) {
    chatBox.hidden = true;
    return;
  }
  chatBox.hidden = false;
  const chips = activeChat.chips
    .map((chip) => `<span class="chip"><b>${chip.label}:</b> ${chip.text}</span>`)
    .join("");
  const turns = activeChat.turns
    .map((turn) => `<p class="${turn.role}">${turn.text}</p>`)
    .join("");
  const error = activeChat.error ? `<p class="error">${activeChat.error}</p>` : "";
  chatBox.innerHTML =
    `<div class="chips">${chips}</div><div class="turns">${turns}</div>${error}` +
    `<input id="chat-input" placeholder="Ask about this reference" />` +
    `<button id="chat-send">Send</button>`;
  const input = chatBox.querySelector<HTMLInputElement>("#chat-input")!;
  const send = chatBox.querySelector<HTMLButtonElement>("#chat-send")!;
  input.value = activeChat.input;
  const syncSend = () => {
    activeChat!.input = input.value;
    send.disabled = !activeChat!.canSend();
  };
  input.addEventListener("input", syncSend);
  send.addEventListener("click", async () => {
    await activeChat!.send();
    renderChat();
  });
  syncSend();
}

tex.addEventListener("select", () => {
  app.editor.buffer = tex.value;
  app.editor.select(tex.selectionStart, tex.selectionEnd);
  syncOverlay();
});

discoverButton.addEventListener("click", async () => {
  render();
  await app.discoverSelection();
  render();
});

document.querySelector<HTMLButtonElement>("#load")!.addEventListener("click", async () => {
  await app.loadManuscript(tex.value, bib.value);
  render();
});

render();
