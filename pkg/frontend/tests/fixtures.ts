/** Canned payloads and a scriptable fake client for state/panel tests. */

import { TempoCauseClient } from "../src/api.js";
import type {
  DatasetSummaryJson,
  ReportJson,
  SessionStateJson,
  SweepJson,
} from "../src/types.js";

export const SUMMARY: DatasetSummaryJson = {
  name: "fixture",
  length: 100,
  time_unit_label: "hour",
  variables: [
    {
      name: "Glucose",
      kind: "continuous",
      count: 100,
      missing: 0,
      min: 60,
      max: 180,
      mean: 120,
      histogram: { edges: [60, 120, 180], counts: [40, 60] },
    },
    {
      name: "RegularIns",
      kind: "discrete",
      count: 80,
      missing: 20,
      levels: { high: 20, low: 30, normal: 30 },
    },
  ],
  warnings: [],
};

export function sessionState(overrides: Partial<SessionStateJson> = {}): SessionStateJson {
  return {
    effect: { effect_type: "decrease", variable: "Glucose", event: null, p_threshold: null },
    causes: [
      { id: "fast", variable: "RegularIns", kind: "levels", lo: null, hi: null,
        levels: ["high", "normal"], label: "fast insulin" },
    ],
    window: { r: 1, s: 1 },
    epsilon: 0,
    ...overrides,
  };
}

export function reportFixture(sig: string[] = ["fast"]): ReportJson {
  return {
    effect: { effect_type: "decrease", variable: "Glucose", event: null, p_threshold: null },
    window: { r: 1, s: 1 },
    epsilon: 0,
    causes: [
      {
        event: { id: "fast", variable: "RegularIns", kind: "levels", lo: null, hi: null,
                 levels: ["high", "normal"], label: "fast insulin" },
        elevation: -12.5,
        eps_avg: -10.25,
        eps_reason: null,
        occurrence_count: 40,
        is_significant: sig.includes("fast"),
        skipped_terms: 0,
        missing_window_fraction: 0,
      },
    ],
    matrix: { event_ids: ["fast"], values: [[-12.5]] },
    combined: { base: 120, conditional: 104.5, influence: -15.5, occurrences: 40, reason: null },
    significant_ids: sig,
    warnings: [],
  };
}

export function sweepFixture(): SweepJson {
  return {
    max_delay: 4,
    base: 120,
    points: [
      { delay: 0, conditional: 119, influence: -1 },
      { delay: 1, conditional: 104.5, influence: -15.5 },
      { delay: 2, conditional: 112, influence: -8 },
      { delay: 3, conditional: null, influence: null },
      { delay: 4, conditional: 118, influence: -2 },
    ],
  };
}

export interface FakeCalls {
  patch: number;
  sweep: number;
  report: number;
}

/** A client whose responses are canned and optionally delayed per call. */
export function fakeClient(options: { patchDelayMs?: number[] } = {}): {
  client: TempoCauseClient;
  calls: FakeCalls;
} {
  const calls: FakeCalls = { patch: 0, sweep: 0, report: 0 };
  const delays = options.patchDelayMs ?? [];
  const client = new TempoCauseClient("http://fake");
  const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

  Object.assign(client, {
    async createSessionFromSample() {
      return { session_id: "s1", summary: SUMMARY };
    },
    async getSession() {
      return { state: sessionState(), summary: SUMMARY };
    },
    async patchSession(_id: string, body: { epsilon?: number }) {
      const index = calls.patch;
      calls.patch += 1;
      if (delays[index]) await sleep(delays[index]);
      const eps = body.epsilon ?? 0;
      const sig = Math.abs(-10.25) >= eps ? ["fast"] : [];
      const rep = reportFixture(sig);
      rep.epsilon = eps;
      return { state: sessionState({ epsilon: eps }), report: rep };
    },
    async report() {
      calls.report += 1;
      return reportFixture();
    },
    async sweep() {
      calls.sweep += 1;
      return sweepFixture();
    },
    async series() {
      return { length: 100, time_unit_label: "hour", tracks: [] };
    },
  });
  return { client, calls };
}
