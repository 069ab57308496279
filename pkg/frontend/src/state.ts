/** Panel state and the single batched refresh pipeline.

Every interaction routes through here: the server owns all statistics, this
store owns which query is current. Responses carry the sequence number of
the request that issued them; anything superseded by a newer interaction is
dropped, so charts never regress to a stale slider position. One inference
refresh applies report and sweep together and bumps `renderBatch` exactly
once, which is what keeps the box/area/donut/matrix quartet consistent.
*/

import { ApiError, TempoCauseClient } from "./api.js";
import type {
  DatasetSummaryJson,
  EffectJson,
  EventJson,
  FlowPayloadJson,
  ReportJson,
  SeriesJson,
  SessionStateJson,
  SweepJson,
} from "./types.js";

export type StateEvent = "inference" | "series" | "flow" | "session";
type Listener = () => void;

export class AppState {
  summary: DatasetSummaryJson | null = null;
  session: SessionStateJson | null = null;
  report: ReportJson | null = null;
  sweep: SweepJson | null = null;
  series: SeriesJson | null = null;
  flow: FlowPayloadJson | null = null;

  /** UI-owned knobs mirrored into the session on each committed change. */
  delay = 1;
  selectRange = false;
  windowR = 1;
  windowS = 1;
  epsilon = 0;
  maxDelay = 8;

  /** Incremented once per applied inference batch (report + sweep). */
  renderBatch = 0;

  private sessionId: string | null = null;
  private seq = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private listeners = new Map<StateEvent, Set<Listener>>();
  private pending: Promise<void> = Promise.resolve();

  constructor(
    readonly client: TempoCauseClient,
    readonly debounceMs = 80,
  ) {}

  get id(): string {
    if (this.sessionId === null) throw new Error("no session loaded");
    return this.sessionId;
  }

  get hasSession(): boolean {
    return this.sessionId !== null;
  }

  on(event: StateEvent, fn: Listener): void {
    if (!this.listeners.has(event)) this.listeners.set(event, new Set());
    this.listeners.get(event)!.add(fn);
  }

  private emit(event: StateEvent): void {
    for (const fn of this.listeners.get(event) ?? []) fn();
  }

  window(): { r: number; s: number } {
    return this.selectRange
      ? { r: this.windowR, s: this.windowS }
      : { r: this.delay, s: this.delay };
  }

  // -- session lifecycle ----------------------------------------------------

  async loadSample(sample: string): Promise<void> {
    const handle = await this.client.createSessionFromSample(sample);
    await this.adopt(handle.session_id, handle.summary);
  }

  async loadCsv(csv: string, name: string): Promise<void> {
    const handle = await this.client.createSessionFromCsv(csv, name);
    await this.adopt(handle.session_id, handle.summary);
  }

  private async adopt(id: string, summary: DatasetSummaryJson): Promise<void> {
    this.sessionId = id;
    this.summary = summary;
    const { state } = await this.client.getSession(id);
    this.session = state;
    this.delay = state.window.r;
    this.windowR = state.window.r;
    this.windowS = state.window.s;
    this.epsilon = state.epsilon;
    this.report = null;
    this.sweep = null;
    this.series = null;
    this.flow = null;
    this.emit("session");
    this.emit("inference");
    this.emit("series");
    this.emit("flow");
  }

  // -- mutations --------------------------------------------------------

  async setEffect(effect: EffectJson): Promise<void> {
    const result = await this.client.setEffect(this.id, effect);
    this.session = result.state;
    await this.refreshInference();
    await this.refreshSeries();
    this.emit("session");
  }

  async addCause(event: EventJson): Promise<void> {
    const result = await this.client.addCause(this.id, event);
    this.session = result.state;
    await this.refreshInference();
    await this.refreshSeries();
    this.emit("session");
  }

  async removeCause(eventId: string): Promise<void> {
    const result = await this.client.removeCause(this.id, eventId);
    this.session = result.state;
    await this.refreshInference();
    await this.refreshSeries();
    this.emit("session");
  }

  async runEstimate(exclude: string[] = []): Promise<void> {
    const result = await this.client.estimate(this.id, exclude);
    this.session = result.state;
    await this.refreshInference();
    await this.refreshSeries();
    this.emit("session");
  }

  async saveToFlow(): Promise<void> {
    this.flow = await this.client.flowSave(this.id);
    this.emit("flow");
  }

  async refreshFlow(): Promise<void> {
    this.flow = await this.client.flow(this.id);
    this.emit("flow");
  }

  async reloadFlowNode(nodeId: string, role: "cause" | "effect"): Promise<void> {
    const result = await this.client.flowReload(this.id, nodeId, role);
    this.session = result.state;
    await this.refreshInference();
    await this.refreshSeries();
    this.emit("session");
  }

  async deleteFlowNode(nodeId: string): Promise<void> {
    this.flow = await this.client.flowDeleteNode(this.id, nodeId);
    this.emit("flow");
  }

  // -- sliders ---------------------------------------------------------

  /** Delay slider: a single-point window at d. */
  setDelay(d: number): Promise<void> {
    this.delay = d;
    if (!this.selectRange) {
      this.windowR = d;
      this.windowS = d;
    }
    return this.scheduleRefresh();
  }

  setWindowRange(r: number, s: number): Promise<void> {
    this.selectRange = true;
    this.windowR = r;
    this.windowS = s;
    return this.scheduleRefresh();
  }

  setSelectRange(on: boolean): Promise<void> {
    this.selectRange = on;
    return this.scheduleRefresh();
  }

  setEpsilon(eps: number): Promise<void> {
    this.epsilon = eps;
    return this.scheduleRefresh();
  }

  setMaxDelay(d: number): Promise<void> {
    this.maxDelay = d;
    return this.scheduleRefresh();
  }

  /** Trailing debounce so drags fire one request per settle. */
  private scheduleRefresh(): Promise<void> {
    if (this.debounceMs === 0) {
      this.pending = this.refreshInference();
      return this.pending;
    }
    if (this.timer !== null) clearTimeout(this.timer);
    this.pending = new Promise((resolve) => {
      this.timer = setTimeout(() => {
        this.timer = null;
        this.refreshInference().then(resolve, resolve);
      }, this.debounceMs);
    });
    return this.pending;
  }

  /** Await whatever refresh is in flight (test hook). */
  settled(): Promise<void> {
    return this.pending;
  }

  /** Push window/epsilon to the session, then apply report+sweep as ONE batch. */
  async refreshInference(): Promise<void> {
    if (!this.hasSession) return;
    const mySeq = ++this.seq;
    const { r, s } = this.window();
    let report: ReportJson | null = null;
    let sweep: SweepJson | null = null;
    try {
      const patched = await this.client.patchSession(this.id, {
        window: { r, s },
        epsilon: this.epsilon,
      });
      this.session = patched.state;
      report = patched.report;
      if (report !== null && report.significant_ids.length > 0) {
        sweep = await this.client.sweep(this.id, this.maxDelay);
      }
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      report = null;
      sweep = null;
    }
    if (mySeq !== this.seq) return; // superseded by a newer interaction
    this.report = report;
    this.sweep = sweep;
    this.renderBatch += 1;
    this.emit("inference");
  }

  async refreshSeries(): Promise<void> {
    if (!this.hasSession) return;
    this.series = await this.client.series(this.id);
    this.emit("series");
  }
}
