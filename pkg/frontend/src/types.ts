/** Payload shapes mirroring the service JSON contracts. */

export type EffectType = "increase" | "decrease" | "valuein";

export interface EventJson {
  id: string;
  variable: string;
  kind: "range" | "levels";
  lo: number | null;
  hi: number | null;
  levels: string[] | null;
  label: string;
}

export interface EffectJson {
  effect_type: EffectType;
  variable: string | null;
  event: EventJson | null;
  p_threshold: number | null;
}

export interface WindowJson {
  r: number;
  s: number;
}

export interface CauseMeasureJson {
  event: EventJson;
  elevation: number;
  eps_avg: number | null;
  eps_reason: string | null;
  occurrence_count: number;
  is_significant: boolean;
  skipped_terms: number;
  missing_window_fraction: number;
}

export interface ReportJson {
  effect: EffectJson;
  window: WindowJson;
  epsilon: number;
  causes: CauseMeasureJson[];
  matrix: { event_ids: string[]; values: (number | null)[][] };
  combined: {
    base: number;
    conditional: number | null;
    influence: number | null;
    occurrences: number | null;
    reason: string | null;
  };
  significant_ids: string[];
  warnings: string[];
}

export interface SweepPointJson {
  delay: number;
  conditional: number | null;
  influence: number | null;
}

export interface SweepJson {
  max_delay: number;
  base: number;
  points: SweepPointJson[];
}

export interface HistogramJson {
  edges: number[] | null;
  counts: number[];
  mean: number | null;
  levels: string[] | null;
}

export interface ConditionalJson {
  cause: EventJson;
  effect: EffectJson;
  delay: number;
  base: HistogramJson;
  conditional: HistogramJson;
  occurrences: number;
  conditional_count: number;
  no_occurrences: boolean;
}

export interface VariableSummaryJson {
  name: string;
  kind: "continuous" | "discrete";
  count: number;
  missing: number;
  min?: number;
  max?: number;
  mean?: number;
  histogram?: { edges: number[]; counts: number[] };
  levels?: Record<string, number>;
}

export interface DatasetSummaryJson {
  name: string;
  length: number;
  time_unit_label: string;
  variables: VariableSummaryJson[];
  warnings: string[];
}

export interface SessionStateJson {
  effect: EffectJson | null;
  causes: EventJson[];
  window: WindowJson;
  epsilon: number;
}

export interface SeriesTrackJson {
  role: "effect" | "cause";
  event_id: string | null;
  variable: string;
  kind: "continuous" | "discrete";
  label: string;
  values: (number | string | null)[];
  labels: number[] | null;
  levels: string[] | null;
}

export interface SeriesJson {
  length: number;
  time_unit_label: string;
  tracks: SeriesTrackJson[];
}

export interface FlowNodeJson {
  node_id: string;
  variable: string;
  constraint: { kind: string; lo?: number; hi?: number; levels?: string[] } | null;
  effect_type: EffectType | null;
  label: string;
}

export interface FlowEdgeJson {
  from: string;
  to: string;
  window: WindowJson;
  effect_type: EffectType;
  strength: number | null;
  saved_at: string;
}

export interface FlowGraphJson {
  version: number;
  fingerprint: unknown;
  nodes: FlowNodeJson[];
  edges: FlowEdgeJson[];
}

export interface FlowPayloadJson {
  graph: FlowGraphJson;
  layout: Record<string, { x: number; layer: number }>;
  diff?: unknown;
}
