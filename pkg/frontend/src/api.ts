/** Thin typed client over the service HTTP/JSON API. */

import type {
  ConditionalJson,
  DatasetSummaryJson,
  EffectJson,
  EventJson,
  FlowPayloadJson,
  ReportJson,
  SeriesJson,
  SessionStateJson,
  SweepJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body?.code ?? "error", body?.message ?? resp.statusText);
  }
  return body as T;
}

export interface SessionHandle {
  session_id: string;
  summary: DatasetSummaryJson;
}

export interface StateAndReport {
  state: SessionStateJson;
  report: ReportJson | null;
}

export class TempoCauseClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSessionFromSample(sample: string): Promise<SessionHandle> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sample }),
    });
    return expectJson<SessionHandle>(resp);
  }

  async createSessionFromCsv(csv: string, name: string): Promise<SessionHandle> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ csv, name }),
    });
    return expectJson<SessionHandle>(resp);
  }

  async getSession(id: string): Promise<{ state: SessionStateJson; summary: DatasetSummaryJson }> {
    return expectJson(await fetch(this.url(`/sessions/${id}`)));
  }

  async setEffect(id: string, effect: EffectJson): Promise<StateAndReport> {
    const resp = await fetch(this.url(`/sessions/${id}/effect`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(effect),
    });
    return expectJson<StateAndReport>(resp);
  }

  async patchSession(
    id: string,
    body: { window?: { r: number; s: number }; epsilon?: number },
  ): Promise<StateAndReport> {
    const resp = await fetch(this.url(`/sessions/${id}`), {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return expectJson<StateAndReport>(resp);
  }

  async addCause(id: string, event: EventJson): Promise<StateAndReport> {
    const resp = await fetch(this.url(`/sessions/${id}/causes`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(event),
    });
    return expectJson<StateAndReport>(resp);
  }

  async removeCause(id: string, eventId: string): Promise<StateAndReport> {
    const resp = await fetch(this.url(`/sessions/${id}/causes/${eventId}`), {
      method: "DELETE",
    });
    return expectJson<StateAndReport>(resp);
  }

  async conditional(id: string, cause: EventJson | string, delay: number): Promise<ConditionalJson> {
    const causeParam = typeof cause === "string" ? cause : JSON.stringify(cause);
    const params = new URLSearchParams({ cause: causeParam, delay: String(delay) });
    return expectJson(await fetch(this.url(`/sessions/${id}/conditional?${params}`)));
  }

  async report(
    id: string,
    query: { eps?: number; r?: number; s?: number } = {},
  ): Promise<ReportJson> {
    const params = new URLSearchParams();
    if (query.eps !== undefined) params.set("eps", String(query.eps));
    if (query.r !== undefined) params.set("r", String(query.r));
    if (query.s !== undefined) params.set("s", String(query.s));
    const suffix = params.size ? `?${params}` : "";
    return expectJson(await fetch(this.url(`/sessions/${id}/report${suffix}`)));
  }

  async sweep(
    id: string,
    maxDelay: number,
    query: { eps?: number; r?: number; s?: number } = {},
  ): Promise<SweepJson> {
    const params = new URLSearchParams({ max: String(maxDelay) });
    if (query.eps !== undefined) params.set("eps", String(query.eps));
    if (query.r !== undefined) params.set("r", String(query.r));
    if (query.s !== undefined) params.set("s", String(query.s));
    return expectJson(await fetch(this.url(`/sessions/${id}/sweep?${params}`)));
  }

  async series(id: string): Promise<SeriesJson> {
    return expectJson(await fetch(this.url(`/sessions/${id}/series`)));
  }

  async estimate(id: string, exclude: string[] = []): Promise<StateAndReport> {
    const resp = await fetch(this.url(`/sessions/${id}/estimate`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ exclude }),
    });
    return expectJson<StateAndReport>(resp);
  }

  async flowSave(id: string): Promise<FlowPayloadJson> {
    const resp = await fetch(this.url(`/sessions/${id}/flow/save`), { method: "POST" });
    return expectJson<FlowPayloadJson>(resp);
  }

  async flow(id: string): Promise<FlowPayloadJson> {
    return expectJson(await fetch(this.url(`/sessions/${id}/flow`)));
  }

  async flowReload(id: string, nodeId: string, role: "cause" | "effect"): Promise<StateAndReport> {
    const resp = await fetch(
      this.url(`/sessions/${id}/flow/node/${nodeId}/reload?role=${role}`),
      { method: "POST" },
    );
    return expectJson<StateAndReport>(resp);
  }

  async flowDeleteNode(id: string, nodeId: string): Promise<FlowPayloadJson> {
    const resp = await fetch(this.url(`/sessions/${id}/flow/node/${nodeId}`), {
      method: "DELETE",
    });
    return expectJson<FlowPayloadJson>(resp);
  }
}
