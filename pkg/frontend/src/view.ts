/** DOM rendering for one trial: audio players and sliders in the server's
 * presentation order, a submit button gated on completeness, and inline
 * error display. The markup only ever contains opaque stimulus handles. */

import { ApiError, Service, TrialPayload } from "./api.js";
import { TrialState } from "./trial.js";

export interface TrialView {
  state: TrialState;
  submitButton: HTMLButtonElement;
  errorBox: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTrial(
  root: HTMLElement,
  payload: TrialPayload,
  service: Service,
  evaluatorId: string,
  onAdvance: () => void,
): TrialView {
  const handles = payload.stimuli ?? [];
  const state = new TrialState(handles);
  root.replaceChildren();

  const header = el("div", "trial-header");
  header.appendChild(
    el("h2", undefined, `Trial ${payload.completed + 1} of ${payload.total}`),
  );
  header.appendChild(el("p", "instruction", payload.instruction ?? ""));
  root.appendChild(header);

  const list = el("div", "stimuli");
  handles.forEach((handle, index) => {
    const row = el("div", "stimulus");
    row.dataset.handle = handle;

    const label = el("span", "stimulus-label", `Sample ${index + 1}`);
    row.appendChild(label);

    const audio = el("audio");
    audio.controls = true;
    audio.src = service.stimulusUrl(handle);
    audio.preload = "none";
    audio.addEventListener("play", () => {
      state.markPlayed(handle);
      update();
    });
    row.appendChild(audio);

    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0";
    slider.max = "100";
    slider.step = "1";
    // sliders start visually centered but count as unset until touched
    slider.value = "50";
    slider.className = "score-slider unset";

    const readout = el("span", "score-readout", "–");
    slider.addEventListener("input", () => {
      state.setScore(handle, Number(slider.value));
      slider.classList.remove("unset");
      readout.textContent = slider.value;
      update();
    });
    row.appendChild(slider);
    row.appendChild(readout);
    list.appendChild(row);
  });
  root.appendChild(list);

  const errorBox = el("div", "error-box");
  errorBox.hidden = true;
  root.appendChild(errorBox);

  const submitButton = el("button", "submit", "Submit ratings");
  submitButton.disabled = true;
  root.appendChild(submitButton);

  function update(): void {
    submitButton.disabled = !state.complete || inFlight;
  }

  let inFlight = false;
  let submitted = false;
  submitButton.addEventListener("click", async () => {
    if (inFlight || submitted || !state.complete) return;
    inFlight = true;
    update();
    errorBox.hidden = true;
    try {
      await service.submitRating({
        session_id: payload.session_id,
        evaluator_id: evaluatorId,
        trial_id: payload.trial_id ?? "",
        scores: state.scores(),
      });
      submitted = true;
      onAdvance();
    } catch (err) {
      inFlight = false;
      update();
      errorBox.hidden = false;
      errorBox.textContent =
        err instanceof ApiError
          ? `The server rejected the rating: ${err.message}`
          : "Could not reach the server. Please try again.";
    }
  });

  return { state, submitButton, errorBox };
}

export function renderCompletion(root: HTMLElement, total: number): void {
  root.replaceChildren();
  const box = el("div", "completion");
  box.appendChild(el("h2", undefined, "All trials done"));
  box.appendChild(
    el("p", undefined,
       `You rated ${total} trial${total === 1 ? "" : "s"}. Thank you!`),
  );
  root.appendChild(box);
}

export function renderError(
  root: HTMLElement,
  message: string,
  onRetry: () => void,
): void {
  root.replaceChildren();
  const box = el("div", "load-error");
  box.appendChild(el("p", undefined, message));
  const retry = el("button", "retry", "Retry");
  retry.addEventListener("click", onRetry);
  box.appendChild(retry);
  root.appendChild(box);
}
