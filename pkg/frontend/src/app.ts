/** Trial loop: fetch the next unanswered trial, render it, submit, repeat
 * until the server reports the session complete. */

import { Service } from "./api.js";
import { renderCompletion, renderError, renderTrial } from "./view.js";

export interface AppOptions {
  sessionId: string;
  evaluatorId: string;
  service: Service;
}

export async function advance(root: HTMLElement, opts: AppOptions): Promise<void> {
  let payload;
  try {
    payload = await opts.service.nextTrial(opts.sessionId, opts.evaluatorId);
  } catch {
    renderError(root, "Could not load the next trial.", () => {
      void advance(root, opts);
    });
    return;
  }
  if (payload.done) {
    renderCompletion(root, payload.total);
    return;
  }
  renderTrial(root, payload, opts.service, opts.evaluatorId, () => {
    void advance(root, opts);
  });
}

/** Evaluator id entry screen shown once at the start. */
export function renderStart(
  root: HTMLElement,
  onStart: (evaluatorId: string) => void,
): void {
  root.replaceChildren();
  const box = document.createElement("div");
  box.className = "start";
  const heading = document.createElement("h2");
  heading.textContent = "Listening test";
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "Your evaluator id";
  const button = document.createElement("button");
  button.textContent = "Start";
  button.addEventListener("click", () => {
    const id = input.value.trim();
    if (id) onStart(id);
  });
  box.append(heading, input, button);
  root.appendChild(box);
}

export function boot(root: HTMLElement, service: Service): void {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session") ?? "default";
  const evaluator = params.get("evaluator");
  if (evaluator) {
    void advance(root, { sessionId, evaluatorId: evaluator, service });
  } else {
    renderStart(root, (evaluatorId) => {
      void advance(root, { sessionId, evaluatorId, service });
    });
  }
}
