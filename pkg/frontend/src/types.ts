// Wire types for the engine's JSON payloads (bundle schema "hierion/1" and
// the HTTP API). The workbench never recomputes engine semantics; these
// shapes are display inputs only.

export interface StateDoc {
  id: string;
  rank: number;
  level?: number;
  signature?: [string, string][];
}

export interface ArcDoc {
  src: string;
  dst: string;
  delta?: number;
}

export interface CanonicalDiagramDoc {
  id: string;
  states: StateDoc[];
  dev_arcs?: ArcDoc[];
  back_arcs?: ArcDoc[];
  initial: string;
  final: string;
  target_schedule?: { tick: number; assignment: Record<string, string[]> }[];
}

export interface SymbolDoc {
  id: string;
  kind: "individual" | "general";
}

export interface TriggeredArcDoc {
  src: string;
  dst: string;
  symbol: string;
  delta?: number;
}

export interface DecayArcDoc {
  src: string;
  dst: string;
  threshold: number;
}

export interface ControlDiagramDoc {
  id: string;
  states: StateDoc[];
  initial: string;
  final: string;
  alphabet: SymbolDoc[];
  triggered_arcs?: TriggeredArcDoc[];
  decay_arcs?: DecayArcDoc[];
}

export interface ScheduleEntryDoc {
  tick: number;
  symbol: string;
  addressee?: string;
}

export interface ScenarioDoc {
  id: string;
  diagrams: string[];
  mapping?: Record<string, string>;
  schedule?: ScheduleEntryDoc[];
  coupling?: string[];
  lenient_coupling?: boolean;
}

export interface RuleDoc {
  id: string;
  subsystem: string;
  source: string;
  target: string;
  forbidden: string;
  action: string;
  resources: number;
  duration: number;
}

export interface SupportStateDoc {
  diagram: string;
  state: string;
  deadline: number;
}

export interface PartialDiagramDoc {
  id: string;
  support_states: SupportStateDoc[];
  max_ticks?: number;
  max_resources?: number;
}

export interface GoalNodeDoc {
  id: string;
  rule?: string;
  children?: GoalNodeDoc[];
}

export interface BundleDoc {
  version: string;
  hierarchy: { nodes: { id: string; level: number; polymorphic?: boolean; children?: string[] }[] };
  classifiers?: unknown[];
  canonical_diagrams?: CanonicalDiagramDoc[];
  control_diagrams?: ControlDiagramDoc[];
  coupled_groups?: unknown[];
  rules?: RuleDoc[];
  scenarios?: ScenarioDoc[];
  partial_diagrams?: PartialDiagramDoc[];
  goal_trees?: { id: string; root: GoalNodeDoc }[];
}

// API payloads

export interface SessionCreated {
  session: string;
  warnings: string[];
}

export interface Metrics {
  completeness: number;
  redundancy_count: number;
  omitted_possibilities: number;
  complexness: number;
}

export interface SimulateResponse {
  run: string;
  scenario: string;
  horizon: number;
  metrics: Metrics;
  final_states: Record<string, string>;
}

export interface TraceEntry {
  tick: number;
  state: string;
  cause: string;
}

export interface TracePage {
  diagram: string;
  page: number;
  page_size: number;
  total_entries: number;
  entries: TraceEntry[];
}

export interface SimEventDoc {
  tick: number;
  kind: string;
  diagram?: string;
  symbol?: string;
  symbol_kind?: string;
  outcome?: string;
  src?: string;
  dst?: string;
  cause?: string;
  group?: string;
  role?: string;
}

export interface PlanStepDoc {
  rule: string;
  subsystem: string;
  action: string;
  from: string;
  to: string;
  started: number;
  completed: number;
  cumulative_resources: number;
}

export interface ForecastResponse {
  partial_diagram: string;
  feasible: boolean;
  // feasible
  total_ticks?: number;
  total_resources?: number;
  steps?: PlanStepDoc[];
  support_chain?: { diagram: string; state: string; met_at: number }[];
  predicted_diagram?: { states: string[]; dev_arcs: ArcDoc[] };
  // infeasible
  satisfied_prefix?: SupportStateDoc[];
  frontier?: { states: Record<string, string>; elapsed: number; resources: number }[];
}

export interface DivergenceEntryDoc {
  scheduled_tick: number;
  matched_tick: number;
  state: string;
  required: number;
  actual: number;
  deviation: number;
}

export interface RetrospectResponse {
  diagram: string;
  classifier: string;
  verdict: "CONFIRMED" | "REFUTED";
  snapshots: number[];
  occupancy: { state: string; samples: [number, number][] }[];
  arc_counts: { src: string; dst: string; count: number }[];
  divergence: {
    verdict: string;
    first_violation_tick: number | null;
    entries: DivergenceEntryDoc[];
  };
}

export interface ApiError {
  code: string;
  message: string;
  report?: string[];
  stage?: string;
  tick?: number;
}
