/** Application bootstrap: dataset loading plus the four linked panels. */

import { TempoCauseClient } from "./api.js";
import { el } from "./charts.js";
import { ConditionalPanel, FlowPanel, InferencePanel, SequencePanel } from "./panels.js";
import { AppState } from "./state.js";

export interface App {
  state: AppState;
  conditional: ConditionalPanel;
  inference: InferencePanel;
  sequence: SequencePanel;
  flow: FlowPanel;
  root: HTMLElement;
}

export function createApp(
  root: HTMLElement,
  baseUrl: string,
  options: { debounceMs?: number; client?: TempoCauseClient } = {},
): App {
  const client = options.client ?? new TempoCauseClient(baseUrl);
  const state = new AppState(client, options.debounceMs ?? 80);

  const header = el("header", { class: "topbar" });
  header.appendChild(el("h1", {}, "tempocause"));
  const loader = el("div", { class: "loader" });
  const sampleSelect = el("select", { id: "sample-select" });
  for (const sample of ["glucose", "fig1"]) {
    sampleSelect.appendChild(el("option", { value: sample }, sample));
  }
  loader.appendChild(sampleSelect);
  const loadSampleBtn = el("button", { id: "load-sample" }, "Load sample");
  loadSampleBtn.addEventListener("click", () => {
    void state.loadSample(sampleSelect.value);
  });
  loader.appendChild(loadSampleBtn);

  const csvInput = el("input", { type: "file", id: "csv-file", accept: ".csv" });
  csvInput.addEventListener("change", () => {
    const file = csvInput.files?.[0];
    if (!file) return;
    void file.text().then((text) => state.loadCsv(text, file.name.replace(/\.csv$/, "")));
  });
  loader.appendChild(csvInput);
  header.appendChild(loader);
  const status = el("div", { class: "session-status", id: "session-status" });
  header.appendChild(status);
  root.appendChild(header);

  const conditional = new ConditionalPanel(state);
  const inference = new InferencePanel(state, conditional);
  const sequence = new SequencePanel(state, conditional);
  const flow = new FlowPanel(state);

  const grid = el("main", { class: "panel-grid" });
  grid.appendChild(conditional.root);
  grid.appendChild(inference.root);
  grid.appendChild(sequence.root);
  grid.appendChild(flow.root);
  root.appendChild(grid);

  state.on("session", () => {
    status.textContent = state.summary
      ? `${state.summary.name}: ${state.summary.length} points, ` +
        `${state.summary.variables.length} variables`
      : "no dataset loaded";
  });

  return { state, conditional, inference, sequence, flow, root };
}

declare global {
  interface Window {
    TEMPOCAUSE_API?: string;
  }
}

/** Browser entry point; tests call createApp directly instead. */
export function mount(): void {
  const rootEl = document.getElementById("app");
  if (!rootEl) return;
  const base = window.TEMPOCAUSE_API ?? "http://127.0.0.1:8787";
  createApp(rootEl, base);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount();
}
