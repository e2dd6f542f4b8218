// Chat widget: question in, answer bubble out. Entries append in send
// order and fill in as responses land, so rapid double-sends cannot
// interleave. Non-ok answers render with guidance styling; network
// failures grow a retry link.

import type { ApiClient } from "./api.js";
import type { AskBody, ChatEntry } from "./types.js";

export interface ChatHandle {
  root: HTMLElement;
  send(question: string): Promise<void>;
  transcript(): readonly ChatEntry[];
}

export function renderChat(container: HTMLElement, api: ApiClient): ChatHandle {
  const root = document.createElement("div");
  root.className = "chat";

  const log = document.createElement("div");
  log.className = "chat-log";
  root.appendChild(log);

  const form = document.createElement("form");
  form.className = "chat-form";
  const input = document.createElement("input");
  input.className = "chat-input";
  input.type = "text";
  input.placeholder = "Ask about prices, forecasts, or stations…";
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Ask";
  form.append(input, button);
  root.appendChild(form);
  container.appendChild(root);

  const entries: ChatEntry[] = [];

  const bubbleFor = (entry: ChatEntry): HTMLElement => {
    const wrap = document.createElement("div");
    wrap.className = "chat-entry";

    const q = document.createElement("div");
    q.className = "chat-bubble chat-question";
    q.textContent = entry.question;
    wrap.appendChild(q);

    const a = document.createElement("div");
    if (entry.failed) {
      a.className = "chat-bubble chat-answer chat-failed";
      a.textContent = "Network error.";
      const retry = document.createElement("a");
      retry.href = "#";
      retry.className = "chat-retry";
      retry.textContent = "retry";
      retry.addEventListener("click", (ev) => {
        ev.preventDefault();
        void send(entry.question);
      });
      a.append(" ", retry);
    } else if (entry.answer === null) {
      a.className = "chat-bubble chat-answer chat-pending";
      a.textContent = "…";
    } else if (entry.answer.status === "ok") {
      a.className = "chat-bubble chat-answer";
      a.textContent = entry.answer.text;
    } else {
      // Out-of-scope, no-data, and error answers style as guidance.
      a.className = "chat-bubble chat-answer chat-guidance";
      a.textContent = entry.answer.text;
    }
    wrap.appendChild(a);
    return wrap;
  };

  const redraw = () => {
    log.replaceChildren(...entries.map(bubbleFor));
  };

  const send = async (question: string): Promise<void> => {
    const entry: ChatEntry = { question, answer: null, failed: false };
    entries.push(entry);
    redraw();
    let answer: AskBody | null = null;
    try {
      answer = await api.ask(question);
    } catch {
      entry.failed = true;
      redraw();
      return;
    }
    entry.answer = answer;
    redraw();
  };

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const question = input.value.trim();
    if (!question) return;
    input.value = "";
    void send(question);
  });

  return { root, send, transcript: () => entries };
}
