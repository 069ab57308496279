/** The four linked panels.

Panel A explores one candidate cause against the effect's conditional
distribution; panel B holds the tested-cause charts (box/area/donut/matrix)
driven by the delay and threshold sliders; panel C stacks the raw sequences
with paired hover cursors offset by the current delay; panel D accumulates
saved relations on a lag-scaled time axis. Panels never compute statistics:
they draw service payloads, and panel B redraws all four charts from one
applied batch.
*/

import {
  COLOR_INSIGNIFICANT,
  PALETTE,
  areaChart,
  boxChart,
  donutChart,
  el,
  fmt,
  histogramOverlay,
  matrixChart,
  numberSpan,
  setNumber,
  svg,
} from "./charts.js";
import type { AppState } from "./state.js";
import type {
  ConditionalJson,
  EffectJson,
  EventJson,
  SeriesTrackJson,
  VariableSummaryJson,
} from "./types.js";

let eventCounter = 0;

function nextEventId(variable: string): string {
  eventCounter += 1;
  return `ui.${variable}.${eventCounter}`;
}

function variableByName(state: AppState, name: string): VariableSummaryJson | null {
  return state.summary?.variables.find((v) => v.name === name) ?? null;
}

/** Color for a cause event: first selected level's slot for discrete
variables (mirrors the sequence strips), a per-variable slot otherwise. */
export function causeColor(state: AppState, event: EventJson): string {
  const variable = variableByName(state, event.variable);
  if (!variable) return PALETTE[0];
  if (variable.kind === "discrete" && event.levels && variable.levels) {
    const order = Object.keys(variable.levels);
    const first = order.findIndex((level) => event.levels!.includes(level));
    return PALETTE[(first < 0 ? 0 : first) % PALETTE.length];
  }
  const index = state.summary!.variables.findIndex((v) => v.name === event.variable);
  return PALETTE[(index < 0 ? 0 : index) % PALETTE.length];
}

// ---------------------------------------------------------------------------
// Panel A: conditional distribution view
// ---------------------------------------------------------------------------

export class ConditionalPanel {
  readonly root: HTMLElement;
  private effectVar: HTMLSelectElement;
  private effectType: HTMLSelectElement;
  private brushed: HTMLInputElement;
  private effectLo: HTMLInputElement;
  private effectHi: HTMLInputElement;
  private applyBtn: HTMLButtonElement;
  private causeVar: HTMLSelectElement;
  private levelBox: HTMLElement;
  private causeLo: HTMLInputElement;
  private causeHi: HTMLInputElement;
  private delaySlider: HTMLInputElement;
  private delayValue: HTMLElement;
  private addBtn: HTMLButtonElement;
  private chartBox: HTMLElement;
  private statusBox: HTMLElement;
  private selectedLevels = new Set<string>();

  constructor(private state: AppState) {
    this.root = el("section", { class: "panel", id: "panel-conditional" });
    this.root.appendChild(el("h2", {}, "Conditional distribution"));

    const effectRow = el("div", { class: "row effect-row" });
    effectRow.appendChild(el("label", { for: "effect-var" }, "effect"));
    this.effectVar = el("select", { id: "effect-var" });
    effectRow.appendChild(this.effectVar);
    this.effectType = el("select", { id: "effect-type" });
    for (const kind of ["increase", "decrease", "valuein"]) {
      this.effectType.appendChild(el("option", { value: kind }, kind));
    }
    effectRow.appendChild(this.effectType);
    this.brushed = el("input", { type: "checkbox", id: "effect-brushed" });
    effectRow.appendChild(this.brushed);
    effectRow.appendChild(el("label", { for: "effect-brushed" }, "Brushed"));
    this.effectLo = el("input", { type: "number", id: "effect-lo", step: "any" });
    this.effectHi = el("input", { type: "number", id: "effect-hi", step: "any" });
    effectRow.appendChild(this.effectLo);
    effectRow.appendChild(this.effectHi);
    this.applyBtn = el("button", { id: "effect-apply" }, "Set effect");
    effectRow.appendChild(this.applyBtn);
    this.root.appendChild(effectRow);

    const causeRow = el("div", { class: "row cause-row" });
    causeRow.appendChild(el("label", { for: "cause-var" }, "cause"));
    this.causeVar = el("select", { id: "cause-var" });
    causeRow.appendChild(this.causeVar);
    this.levelBox = el("div", { class: "level-box", id: "cause-levels" });
    causeRow.appendChild(this.levelBox);
    this.causeLo = el("input", { type: "number", id: "cause-lo", step: "any" });
    this.causeHi = el("input", { type: "number", id: "cause-hi", step: "any" });
    causeRow.appendChild(this.causeLo);
    causeRow.appendChild(this.causeHi);
    causeRow.appendChild(el("label", { for: "preview-delay" }, "delay"));
    this.delaySlider = el("input", {
      type: "range", id: "preview-delay", min: "0", max: "12", value: "1",
    });
    causeRow.appendChild(this.delaySlider);
    this.delayValue = el("span", { class: "delay-value" }, "1");
    causeRow.appendChild(this.delayValue);
    this.addBtn = el("button", { id: "add-cause" }, "Add");
    causeRow.appendChild(this.addBtn);
    this.root.appendChild(causeRow);

    this.chartBox = el("div", { id: "conditional-chart" });
    this.root.appendChild(this.chartBox);
    this.statusBox = el("div", { class: "status", id: "conditional-status" });
    this.root.appendChild(this.statusBox);

    this.effectType.addEventListener("change", () => this.syncEffectControls());
    this.brushed.addEventListener("change", () => this.syncEffectControls());
    this.applyBtn.addEventListener("click", () => void this.applyEffect());
    this.causeVar.addEventListener("change", () => {
      this.selectedLevels.clear();
      this.syncCauseControls();
      void this.preview();
    });
    this.delaySlider.addEventListener("input", () => {
      this.delayValue.textContent = this.delaySlider.value;
      void this.preview();
    });
    for (const input of [this.causeLo, this.causeHi]) {
      input.addEventListener("change", () => void this.preview());
    }
    this.addBtn.addEventListener("click", () => void this.addCause());

    state.on("session", () => this.renderSession());
    this.renderSession();
  }

  private renderSession(): void {
    const summary = this.state.summary;
    this.effectVar.innerHTML = "";
    this.causeVar.innerHTML = "";
    if (!summary) return;
    for (const variable of summary.variables) {
      this.effectVar.appendChild(el("option", { value: variable.name }, variable.name));
      this.causeVar.appendChild(el("option", { value: variable.name }, variable.name));
    }
    const effect = this.state.session?.effect ?? null;
    if (effect) {
      this.effectVar.value = effect.variable ?? this.effectVar.value;
      this.effectType.value = effect.effect_type;
      if (effect.event && effect.event.kind === "range") {
        this.brushed.checked = true;
        this.effectLo.value = String(effect.event.lo);
        this.effectHi.value = String(effect.event.hi);
      }
    }
    this.syncEffectControls();
    this.syncCauseControls();
  }

  /** Brushing applies only to valuein effects; pickers stay dead until an
  effect exists. */
  private syncEffectControls(): void {
    const isValueIn = this.effectType.value === "valuein";
    this.brushed.disabled = !isValueIn;
    if (!isValueIn) this.brushed.checked = false;
    const brushOn = isValueIn && this.brushed.checked;
    this.effectLo.disabled = !brushOn;
    this.effectHi.disabled = !brushOn;

    const hasEffect = this.state.session?.effect != null;
    this.causeVar.disabled = !hasEffect;
    this.delaySlider.disabled = !hasEffect;
    this.addBtn.disabled = !hasEffect;
    this.causeLo.disabled = !hasEffect;
    this.causeHi.disabled = !hasEffect;
  }

  private syncCauseControls(): void {
    this.levelBox.innerHTML = "";
    const variable = variableByName(this.state, this.causeVar.value);
    if (!variable) return;
    if (variable.kind === "discrete" && variable.levels) {
      this.causeLo.style.display = "none";
      this.causeHi.style.display = "none";
      Object.entries(variable.levels).forEach(([level, count], index) => {
        const btn = el(
          "button",
          { class: "level-btn", "data-level": level, title: `${count} points` },
          `${level} (${count})`,
        );
        btn.style.borderColor = PALETTE[index % PALETTE.length];
        btn.addEventListener("click", () => {
          if (this.selectedLevels.has(level)) this.selectedLevels.delete(level);
          else this.selectedLevels.add(level);
          btn.classList.toggle("selected", this.selectedLevels.has(level));
          void this.preview();
        });
        this.levelBox.appendChild(btn);
      });
    } else {
      this.causeLo.style.display = "";
      this.causeHi.style.display = "";
      if (variable.min !== undefined) this.causeLo.value = String(variable.min);
      if (variable.max !== undefined) this.causeHi.value = String(variable.max);
    }
  }

  buildEffect(): EffectJson {
    const kind = this.effectType.value as EffectJson["effect_type"];
    const variable = this.effectVar.value;
    if (kind === "valuein") {
      const lo = Number(this.effectLo.value);
      const hi = Number(this.effectHi.value);
      return {
        effect_type: "valuein",
        variable,
        event: {
          id: "effect",
          variable,
          kind: "range",
          lo,
          hi,
          levels: null,
          label: `${variable} in [${lo}, ${hi}]`,
        },
        p_threshold: null,
      };
    }
    return { effect_type: kind, variable, event: null, p_threshold: null };
  }

  private async applyEffect(): Promise<void> {
    try {
      await this.state.setEffect(this.buildEffect());
      this.statusBox.textContent = "";
    } catch (err) {
      this.statusBox.textContent = String((err as Error).message);
    }
    this.syncEffectControls();
  }

  buildCauseEvent(): EventJson | null {
    const variable = variableByName(this.state, this.causeVar.value);
    if (!variable) return null;
    if (variable.kind === "discrete") {
      if (this.selectedLevels.size === 0) return null;
      const levels = [...this.selectedLevels].sort();
      return {
        id: nextEventId(variable.name),
        variable: variable.name,
        kind: "levels",
        lo: null,
        hi: null,
        levels,
        label: `${variable.name} in {${levels.join(", ")}}`,
      };
    }
    const lo = Number(this.causeLo.value);
    const hi = Number(this.causeHi.value);
    if (!Number.isFinite(lo) || !Number.isFinite(hi)) return null;
    return {
      id: nextEventId(variable.name),
      variable: variable.name,
      kind: "range",
      lo,
      hi,
      levels: null,
      label: `${variable.name} in [${lo}, ${hi}]`,
    };
  }

  async preview(): Promise<void> {
    if (!this.state.hasSession || !this.state.session?.effect) return;
    const event = this.buildCauseEvent();
    if (!event) {
      this.chartBox.innerHTML = "";
      return;
    }
    try {
      const payload = await this.state.client.conditional(
        this.state.id,
        event,
        Number(this.delaySlider.value),
      );
      this.renderConditional(payload);
      this.statusBox.textContent = payload.no_occurrences
        ? "cause never occurs in the series"
        : "";
    } catch (err) {
      this.statusBox.textContent = String((err as Error).message);
    }
  }

  renderConditional(payload: ConditionalJson): void {
    this.chartBox.innerHTML = "";
    const chart = histogramOverlay(payload.base, payload.conditional, {
      xLabel: payload.effect.variable ?? "effect",
    });
    this.chartBox.appendChild(chart);
    const readout = el("div", { class: "readout" });
    readout.appendChild(el("span", {}, "base mean "));
    readout.appendChild(numberSpan(payload.base.mean, "num base-mean"));
    readout.appendChild(el("span", {}, " conditional mean "));
    readout.appendChild(numberSpan(payload.conditional.mean, "num cond-mean"));
    readout.appendChild(el("span", {}, " occurrences "));
    readout.appendChild(numberSpan(payload.occurrences, "num occurrences"));
    this.chartBox.appendChild(readout);
  }

  private async addCause(): Promise<void> {
    const event = this.buildCauseEvent();
    if (!event) {
      this.statusBox.textContent = "pick level bars or a value range first";
      return;
    }
    try {
      await this.state.addCause(event);
      this.statusBox.textContent = "";
    } catch (err) {
      this.statusBox.textContent = String((err as Error).message);
    }
  }

  /** Reload an existing event into the pickers (sequence-view click-through). */
  loadEvent(event: EventJson): void {
    this.causeVar.value = event.variable;
    this.selectedLevels = new Set(event.levels ?? []);
    this.syncCauseControls();
    if (event.kind === "range") {
      this.causeLo.value = String(event.lo);
      this.causeHi.value = String(event.hi);
    } else {
      for (const btn of this.levelBox.querySelectorAll<HTMLButtonElement>(".level-btn")) {
        btn.classList.toggle(
          "selected",
          this.selectedLevels.has(btn.dataset.level ?? ""),
        );
      }
    }
    void this.preview();
  }
}

// ---------------------------------------------------------------------------
// Panel B: causal inference panel
// ---------------------------------------------------------------------------

export class InferencePanel {
  readonly root: HTMLElement;
  private epsSlider: HTMLInputElement;
  private epsValue: HTMLElement;
  private delaySlider: HTMLInputElement;
  private delayValue: HTMLElement;
  private rangeToggle: HTMLInputElement;
  private winR: HTMLInputElement;
  private winS: HTMLInputElement;
  private maxDelayInput: HTMLInputElement;
  private boxBox: HTMLElement;
  private areaBox: HTMLElement;
  private donutBox: HTMLElement;
  private matrixBox: HTMLElement;
  private warnBox: HTMLElement;

  constructor(
    private state: AppState,
    private conditional: ConditionalPanel,
  ) {
    this.root = el("section", { class: "panel", id: "panel-inference" });
    this.root.appendChild(el("h2", {}, "Causal inference"));

    const controls = el("div", { class: "row controls" });
    controls.appendChild(el("label", { for: "eps-slider" }, "epsilon"));
    this.epsSlider = el("input", {
      type: "range", id: "eps-slider", min: "0", max: "1", step: "0.01", value: "0",
    });
    controls.appendChild(this.epsSlider);
    this.epsValue = el("span", { class: "eps-display", id: "eps-display" }, "0");
    controls.appendChild(this.epsValue);

    controls.appendChild(el("label", { for: "delay-slider" }, "delay"));
    this.delaySlider = el("input", {
      type: "range", id: "delay-slider", min: "0", max: "8", value: "1",
    });
    controls.appendChild(this.delaySlider);
    this.delayValue = el("span", { class: "delay-display", id: "delay-display" }, "1");
    controls.appendChild(this.delayValue);

    this.rangeToggle = el("input", { type: "checkbox", id: "select-range" });
    controls.appendChild(this.rangeToggle);
    controls.appendChild(el("label", { for: "select-range" }, "Select range"));
    this.winR = el("input", { type: "number", id: "win-r", min: "0", value: "1" });
    this.winS = el("input", { type: "number", id: "win-s", min: "0", value: "1" });
    controls.appendChild(this.winR);
    controls.appendChild(this.winS);

    controls.appendChild(el("label", { for: "max-delay" }, "max delay"));
    this.maxDelayInput = el("input", {
      type: "number", id: "max-delay", min: "1", value: String(state.maxDelay),
    });
    controls.appendChild(this.maxDelayInput);

    const estimateBtn = el("button", { id: "estimate-btn" }, "Estimate causes");
    controls.appendChild(estimateBtn);
    const saveBtn = el("button", { id: "save-flow-btn" }, "Save to causal flow");
    controls.appendChild(saveBtn);
    this.root.appendChild(controls);

    const charts = el("div", { class: "inference-grid" });
    this.areaBox = el("div", { id: "area-box" });
    this.donutBox = el("div", { id: "donut-box" });
    this.boxBox = el("div", { id: "box-box" });
    this.matrixBox = el("div", { id: "matrix-box" });
    charts.appendChild(this.areaBox);
    charts.appendChild(this.donutBox);
    charts.appendChild(this.boxBox);
    charts.appendChild(this.matrixBox);
    this.root.appendChild(charts);
    this.warnBox = el("div", { class: "warnings", id: "report-warnings" });
    this.root.appendChild(this.warnBox);

    this.epsSlider.addEventListener("input", () => {
      this.epsValue.textContent = this.epsSlider.value;
      void this.state.setEpsilon(Number(this.epsSlider.value));
    });
    this.delaySlider.addEventListener("input", () => {
      this.delayValue.textContent = this.delaySlider.value;
      void this.state.setDelay(Number(this.delaySlider.value));
    });
    this.rangeToggle.addEventListener("change", () => {
      this.winR.disabled = !this.rangeToggle.checked;
      this.winS.disabled = !this.rangeToggle.checked;
      void this.state.setSelectRange(this.rangeToggle.checked);
    });
    const pushRange = () => {
      if (this.rangeToggle.checked) {
        void this.state.setWindowRange(Number(this.winR.value), Number(this.winS.value));
      }
    };
    this.winR.addEventListener("change", pushRange);
    this.winS.addEventListener("change", pushRange);
    this.maxDelayInput.addEventListener("change", () => {
      void this.state.setMaxDelay(Number(this.maxDelayInput.value));
      this.delaySlider.max = this.maxDelayInput.value;
    });
    estimateBtn.addEventListener("click", () => void this.state.runEstimate());
    saveBtn.addEventListener("click", () => void this.state.saveToFlow());

    this.winR.disabled = true;
    this.winS.disabled = true;

    state.on("inference", () => this.render());
    this.render();
  }

  /** One pass redraws box, area, donut, and matrix from the applied batch. */
  private render(): void {
    const report = this.state.report;
    this.boxBox.innerHTML = "";
    this.areaBox.innerHTML = "";
    this.donutBox.innerHTML = "";
    this.matrixBox.innerHTML = "";
    this.warnBox.innerHTML = "";
    this.root.dataset.renderBatch = String(this.state.renderBatch);
    if (!report) {
      this.boxBox.appendChild(
        el("div", { class: "placeholder" }, "add causes to run the significance test"),
      );
      return;
    }
    // Probability-form thresholds live in [0, 1]; expectation-form ones
    // scale with the payload, so the slider range adapts to what was seen.
    const maxSeen = Math.max(
      1,
      ...report.causes.map((m) => Math.abs(m.eps_avg ?? m.elevation)),
    );
    const sliderMax = report.effect.effect_type === "valuein" ? 1 : maxSeen * 1.25;
    this.epsSlider.max = String(sliderMax);
    this.epsSlider.step = String(sliderMax / 100);

    const colorOf = (eventId: string) => {
      const measure = report.causes.find((m) => m.event.id === eventId);
      return measure ? causeColor(this.state, measure.event) : COLOR_INSIGNIFICANT;
    };
    this.boxBox.appendChild(boxChart(report, colorOf));

    if (this.state.sweep) {
      const chart = areaChart(
        this.state.sweep,
        report.effect.effect_type,
        this.state.window().s,
      );
      chart.setAttribute("data-sig-ids", report.significant_ids.join(","));
      this.areaBox.appendChild(chart);
    } else {
      const placeholder = el("div", { class: "placeholder", "data-role": "area-chart" },
        "no significant causes at this threshold");
      placeholder.dataset.sigIds = report.significant_ids.join(",");
      this.areaBox.appendChild(placeholder);
    }

    const effectVariable = report.effect.variable ?? "";
    const variable = variableByName(this.state, effectVariable);
    const isProb = report.effect.effect_type === "valuein";
    const spanLo = isProb ? 0 : variable?.min ?? 0;
    const spanHi = isProb ? 1 : variable?.max ?? 1;
    const donut = donutChart(
      report.combined.base,
      report.combined.conditional,
      spanLo,
      spanHi,
      `${effectVariable} ${report.effect.effect_type}`,
      report.effect.effect_type,
    );
    donut.dataset.sigIds = report.significant_ids.join(",");
    this.donutBox.appendChild(donut);

    this.matrixBox.appendChild(matrixChart(report));

    for (const warning of report.warnings) {
      this.warnBox.appendChild(el("div", { class: "warning" }, warning));
    }
  }
}

// ---------------------------------------------------------------------------
// Panel C: time sequence view
// ---------------------------------------------------------------------------

export class SequencePanel {
  readonly root: HTMLElement;
  private tracksBox: HTMLElement;
  private hoverReadout: HTMLElement;
  private valueMode = new Map<string, boolean>();

  constructor(
    private state: AppState,
    private conditional: ConditionalPanel,
  ) {
    this.root = el("section", { class: "panel", id: "panel-sequence" });
    this.root.appendChild(el("h2", {}, "Time sequences"));
    this.tracksBox = el("div", { id: "sequence-tracks" });
    this.root.appendChild(this.tracksBox);
    this.hoverReadout = el("div", { class: "hover-readout", id: "hover-readout" });
    this.root.appendChild(this.hoverReadout);
    state.on("series", () => this.render());
    this.render();
  }

  private trackKey(track: SeriesTrackJson): string {
    return track.event_id ?? `effect:${track.variable}`;
  }

  private render(): void {
    this.tracksBox.innerHTML = "";
    const series = this.state.series;
    if (!series) return;
    const width = 600;
    for (const track of series.tracks) {
      const key = this.trackKey(track);
      const row = el("div", {
        class: "track",
        "data-variable": track.variable,
        "data-role": track.role,
      });
      const name = el("span", { class: "track-name" }, track.label);
      name.addEventListener("click", () => {
        if (track.role === "cause") {
          const event = this.state.session?.causes.find((c) => c.id === track.event_id);
          if (event) this.conditional.loadEvent(event);
        }
      });
      row.appendChild(name);

      const toggle = el("input", { type: "checkbox", class: "mode-toggle" });
      toggle.checked = this.valueMode.get(key) ?? track.kind === "continuous";
      toggle.addEventListener("change", () => {
        this.valueMode.set(key, toggle.checked);
        this.render();
      });
      row.appendChild(toggle);
      row.appendChild(el("span", { class: "mode-label" }, "values"));

      row.appendChild(this.renderStrip(track, toggle.checked, width));

      if (track.role === "cause" && track.event_id) {
        const del = el("button", { class: "track-delete" }, "delete");
        del.addEventListener("click", () => void this.state.removeCause(track.event_id!));
        row.appendChild(del);
      }
      this.tracksBox.appendChild(row);
    }
    const overlay = el("div", { class: "hover-overlay", id: "hover-overlay" });
    overlay.addEventListener("mousemove", (ev) => {
      const frac = (ev as MouseEvent).offsetX / width;
      const t = Math.max(0, Math.min(series.length - 1, Math.round(frac * (series.length - 1))));
      this.setHover(t);
    });
    this.tracksBox.appendChild(overlay);
  }

  /** Label mode: green true / red false / blank missing. Value mode: a line
  for continuous tracks, a level-colored strip for discrete ones. */
  private renderStrip(track: SeriesTrackJson, values: boolean, width: number): SVGElement {
    const height = 26;
    const n = track.values.length;
    const root = svg("svg", {
      width, height, class: "strip", viewBox: `0 0 ${width} ${height}`,
      "data-variable": track.variable,
    });
    const cell = width / n;
    if (!values && track.labels) {
      track.labels.forEach((label, t) => {
        if (label === 2) return; // missing stays blank
        root.appendChild(
          svg("rect", {
            x: t * cell, y: 2, width: Math.max(cell, 0.5), height: height - 4,
            fill: label === 1 ? "#2ca02c" : "#d62728", opacity: 0.85,
            "data-t": t,
          }),
        );
      });
      return root;
    }
    if (track.kind === "continuous") {
      const numbers = track.values.map((v) => (typeof v === "number" ? v : null));
      const finite = numbers.filter((v): v is number => v !== null);
      const lo = Math.min(...finite);
      const hi = Math.max(...finite);
      const span = hi - lo || 1;
      // Pen lifts over missing stretches so gaps stay blank.
      let d = "";
      let pen = false;
      numbers.forEach((v, t) => {
        if (v === null) {
          pen = false;
          return;
        }
        const x = t * cell;
        const y = height - 2 - ((v - lo) / span) * (height - 6);
        d += pen ? ` L ${x} ${y}` : ` M ${x} ${y}`;
        pen = true;
      });
      root.appendChild(svg("path", { d: d.trim(), fill: "none", stroke: "#1f77b4" }));
      return root;
    }
    const levels = track.levels ?? [];
    track.values.forEach((v, t) => {
      if (v === null) return; // missing stays blank
      const index = levels.indexOf(String(v));
      root.appendChild(
        svg("rect", {
          x: t * cell, y: 2, width: Math.max(cell, 0.5), height: height - 4,
          fill: PALETTE[(index < 0 ? 0 : index) % PALETTE.length], "data-t": t,
        }),
      );
    });
    return root;
  }

  /** Paired cursors: causes read at t, the effect reads ahead at t+delay. */
  setHover(t: number): void {
    const series = this.state.series;
    if (!series) return;
    const delay = this.state.window().s;
    const ahead = Math.min(series.length - 1, t + delay);
    const parts: string[] = [];
    for (const track of series.tracks) {
      const at = track.role === "effect" ? ahead : t;
      const value = track.values[at];
      const shown = value === null ? "missing" : String(value);
      parts.push(`${track.variable}@${at}=${shown}`);
    }
    this.hoverReadout.textContent = parts.join("  ");
    this.hoverReadout.dataset.t = String(t);
    this.hoverReadout.dataset.ahead = String(ahead);
  }
}

// ---------------------------------------------------------------------------
// Panel D: causal flow chart
// ---------------------------------------------------------------------------

export class FlowPanel {
  readonly root: HTMLElement;
  private chartBox: HTMLElement;
  private actionsBox: HTMLElement;
  private selected: string | null = null;

  constructor(private state: AppState) {
    this.root = el("section", { class: "panel", id: "panel-flow" });
    this.root.appendChild(el("h2", {}, "Causal flow"));
    this.chartBox = el("div", { id: "flow-chart" });
    this.root.appendChild(this.chartBox);
    this.actionsBox = el("div", { class: "flow-actions", id: "flow-actions" });
    this.root.appendChild(this.actionsBox);
    state.on("flow", () => this.render());
    this.render();
  }

  private render(): void {
    this.chartBox.innerHTML = "";
    this.actionsBox.innerHTML = "";
    const flow = this.state.flow;
    if (!flow || flow.graph.nodes.length === 0) {
      this.chartBox.appendChild(el("div", { class: "placeholder" }, "no saved relations yet"));
      return;
    }
    const xs = Object.values(flow.layout).map((p) => p.x);
    const layers = Object.values(flow.layout).map((p) => p.layer);
    const maxX = Math.max(1, ...xs);
    const width = 640;
    const height = 60 + 70 * Math.max(1, ...layers, 1);
    const xScale = (x: number) => 60 + (x / maxX) * (width - 140);
    const yOf = new Map<string, number>();
    const seenPerLayer = new Map<number, number>();
    for (const node of flow.graph.nodes) {
      const layer = flow.layout[node.node_id]?.layer ?? 0;
      const row = seenPerLayer.get(layer) ?? 0;
      seenPerLayer.set(layer, row + 1);
      yOf.set(node.node_id, 40 + layer * 70 + (row % 2) * 26);
    }
    const root = svg("svg", {
      width, height, class: "flow-svg", viewBox: `0 0 ${width} ${height}`,
    });
    // Dashed lag gridlines along the time axis.
    for (let lag = 0; lag <= maxX; lag += 1) {
      root.appendChild(
        svg("line", {
          x1: xScale(lag), x2: xScale(lag), y1: 16, y2: height - 8,
          stroke: "#ccc", "stroke-dasharray": "4,4",
        }),
      );
      const lagText = svg("text", { x: xScale(lag), y: 12, "font-size": 9, "text-anchor": "middle" });
      lagText.textContent = String(lag);
      root.appendChild(lagText);
    }
    for (const edge of flow.graph.edges) {
      const x1 = xScale(flow.layout[edge.from].x);
      const x2 = xScale(flow.layout[edge.to].x);
      const y1 = yOf.get(edge.from) ?? 40;
      const y2 = yOf.get(edge.to) ?? 40;
      root.appendChild(
        svg("line", {
          x1, y1, x2, y2,
          stroke: edge.effect_type === "decrease" ? "#d62728" : "#2ca02c",
          "stroke-width": 2, class: "flow-edge",
          "data-from": edge.from, "data-to": edge.to,
          "data-effect-type": edge.effect_type,
        }),
      );
    }
    for (const node of flow.graph.nodes) {
      const x = xScale(flow.layout[node.node_id].x);
      const y = yOf.get(node.node_id) ?? 40;
      const group = svg("g", {
        class: "flow-node", "data-node-id": node.node_id,
        transform: `translate(${x} ${y})`,
      });
      group.appendChild(
        svg("circle", {
          r: 9,
          fill: node.effect_type === "decrease" ? "#d62728"
            : node.effect_type ? "#2ca02c" : "#1f77b4",
          stroke: this.selected === node.node_id ? "#000" : "#fff",
          "stroke-width": 2,
        }),
      );
      const text = svg("text", { x: 12, y: 4, "font-size": 10 });
      text.textContent = node.label;
      group.appendChild(text);
      group.addEventListener("click", () => {
        this.selected = node.node_id;
        this.render();
      });
      root.appendChild(group);
    }
    this.chartBox.appendChild(root);

    if (this.selected && flow.graph.nodes.some((n) => n.node_id === this.selected)) {
      const nodeId = this.selected;
      const asCause = el("button", { id: "flow-reload-cause" }, "reload as cause");
      asCause.addEventListener("click", () => void this.state.reloadFlowNode(nodeId, "cause"));
      const asEffect = el("button", { id: "flow-reload-effect" }, "reload as effect");
      asEffect.addEventListener("click", () => void this.state.reloadFlowNode(nodeId, "effect"));
      const remove = el("button", { id: "flow-delete" }, "Del");
      remove.addEventListener("click", () => void this.state.deleteFlowNode(nodeId));
      this.actionsBox.appendChild(asCause);
      this.actionsBox.appendChild(asEffect);
      this.actionsBox.appendChild(remove);
    }
  }
}
