// Pure payload-to-render-model functions. No engine semantics are
// recomputed here: every number in a view model is carried verbatim from
// the engine payload (display strings are labeled formatting of the same
// value, never a recalculation).

import type {
  ArcDoc,
  CanonicalDiagramDoc,
  ControlDiagramDoc,
  DivergenceEntryDoc,
  ForecastResponse,
  Metrics,
  RetrospectResponse,
  ScenarioDoc,
  ScheduleEntryDoc,
  SimEventDoc,
  TraceEntry,
} from "./types.js";

// -- diagram layout ----------------------------------------------------------

export interface DiagramNode {
  id: string;
  rank: number;
  x: number;
  y: number;
  isInitial: boolean;
  isFinal: boolean;
}

export interface DiagramEdge {
  src: string;
  dst: string;
  label: string;
  dashed: boolean;
}

export interface DiagramLayout {
  id: string;
  nodes: DiagramNode[];
  edges: DiagramEdge[];
  width: number;
  height: number;
}

export const NODE_SPACING_X = 140;
export const NODE_SPACING_Y = 70;
export const MARGIN = 60;

/** Rank-layered layout: states left to right by rank, equal ranks stacked. */
export function layoutDiagram(
  id: string,
  states: { id: string; rank: number }[],
  forward: { src: string; dst: string; label: string }[],
  backward: { src: string; dst: string; label: string }[],
  initial: string,
  final: string,
): DiagramLayout {
  const ordered = [...states].sort((a, b) => a.rank - b.rank || (a.id < b.id ? -1 : 1));
  const lanes = new Map<number, number>();
  const nodes: DiagramNode[] = [];
  const columns = [...new Set(ordered.map((s) => s.rank))].sort((a, b) => a - b);
  const columnIndex = new Map(columns.map((rank, i) => [rank, i]));
  for (const state of ordered) {
    const lane = lanes.get(state.rank) ?? 0;
    lanes.set(state.rank, lane + 1);
    nodes.push({
      id: state.id,
      rank: state.rank,
      x: MARGIN + (columnIndex.get(state.rank) ?? 0) * NODE_SPACING_X,
      y: MARGIN + lane * NODE_SPACING_Y,
      isInitial: state.id === initial,
      isFinal: state.id === final,
    });
  }
  const edges: DiagramEdge[] = [
    ...forward.map((a) => ({ src: a.src, dst: a.dst, label: a.label, dashed: false })),
    ...backward.map((a) => ({ src: a.src, dst: a.dst, label: a.label, dashed: true })),
  ];
  const maxLane = Math.max(1, ...[...lanes.values()]);
  return {
    id,
    nodes,
    edges,
    width: MARGIN * 2 + Math.max(0, columns.length - 1) * NODE_SPACING_X,
    height: MARGIN * 2 + (maxLane - 1) * NODE_SPACING_Y,
  };
}

export function layoutCanonical(doc: CanonicalDiagramDoc): DiagramLayout {
  const deltaLabel = (a: ArcDoc) => `Δ${a.delta ?? 1}`;
  return layoutDiagram(
    doc.id,
    doc.states,
    (doc.dev_arcs ?? []).map((a) => ({ src: a.src, dst: a.dst, label: deltaLabel(a) })),
    (doc.back_arcs ?? []).map((a) => ({ src: a.src, dst: a.dst, label: deltaLabel(a) })),
    doc.initial,
    doc.final,
  );
}

export function layoutControl(doc: ControlDiagramDoc): DiagramLayout {
  return layoutDiagram(
    doc.id,
    doc.states,
    (doc.triggered_arcs ?? []).map((a) => ({ src: a.src, dst: a.dst, label: a.symbol })),
    (doc.decay_arcs ?? []).map((a) => ({ src: a.src, dst: a.dst, label: `idle≥${a.threshold}` })),
    doc.initial,
    doc.final,
  );
}

// -- metric panel --------------------------------------------------------------

export interface Gauge {
  name: string;
  /** exact engine value, untouched */
  value: number;
  /** labeled display formatting of the same value */
  display: string;
  kind: "ratio" | "count";
}

export function metricsPanel(metrics: Metrics): Gauge[] {
  const ratio = (name: string, value: number): Gauge => ({
    name,
    value,
    display: value.toFixed(3),
    kind: "ratio",
  });
  const count = (name: string, value: number): Gauge => ({
    name,
    value,
    display: String(value),
    kind: "count",
  });
  return [
    ratio("completeness", metrics.completeness),
    count("redundancy", metrics.redundancy_count),
    count("omitted possibilities", metrics.omitted_possibilities),
    ratio("complexness", metrics.complexness),
  ];
}

// -- schedule editing ------------------------------------------------------------

export interface ScheduleRow {
  index: number;
  tick: number;
  symbol: string;
  addressee: string; // "" means broadcast
}

export function scheduleRows(scenario: ScenarioDoc): ScheduleRow[] {
  return (scenario.schedule ?? []).map((entry, index) => ({
    index,
    tick: entry.tick,
    symbol: entry.symbol,
    addressee: entry.addressee ?? "",
  }));
}

function rowToEntry(row: { tick: number; symbol: string; addressee: string }): ScheduleEntryDoc {
  const entry: ScheduleEntryDoc = { tick: row.tick, symbol: row.symbol };
  if (row.addressee !== "") entry.addressee = row.addressee;
  return entry;
}

/** Pure edits: each returns a new scenario document, source untouched. */
export function addScheduleRow(
  scenario: ScenarioDoc,
  row: { tick: number; symbol: string; addressee: string },
): ScenarioDoc {
  return { ...scenario, schedule: [...(scenario.schedule ?? []), rowToEntry(row)] };
}

export function updateScheduleRow(
  scenario: ScenarioDoc,
  index: number,
  row: { tick: number; symbol: string; addressee: string },
): ScenarioDoc {
  const schedule = [...(scenario.schedule ?? [])];
  if (index < 0 || index >= schedule.length) throw new Error(`no schedule row ${index}`);
  schedule[index] = rowToEntry(row);
  return { ...scenario, schedule };
}

export function removeScheduleRow(scenario: ScenarioDoc, index: number): ScenarioDoc {
  const schedule = [...(scenario.schedule ?? [])];
  if (index < 0 || index >= schedule.length) throw new Error(`no schedule row ${index}`);
  schedule.splice(index, 1);
  return { ...scenario, schedule };
}

/** The export is the draft document itself; the UI adds nothing. */
export function exportScenario(scenario: ScenarioDoc): string {
  return JSON.stringify(scenario, null, 2) + "\n";
}

// -- trace scrubber ---------------------------------------------------------------

/** State occupied at `tick` (entries are a step function, first is initial). */
export function stateAt(entries: TraceEntry[], tick: number): string {
  let current = entries[0]?.state ?? "";
  for (const entry of entries) {
    if (entry.tick > tick) break;
    current = entry.state;
  }
  return current;
}

/** Ticks at which coupled (group-tagged) transitions completed, per diagram. */
export function coupledTicks(events: SimEventDoc[]): Map<string, number[]> {
  const out = new Map<string, number[]>();
  for (const event of events) {
    if (event.kind === "complete" && event.group && event.diagram) {
      const ticks = out.get(event.diagram) ?? [];
      ticks.push(event.tick);
      out.set(event.diagram, ticks);
    }
  }
  return out;
}

export interface ScrubberFrame {
  tick: number;
  states: Record<string, string>;
  coupled: string[]; // diagrams with a coupled completion at this tick
}

export function scrubberFrames(
  traces: Record<string, TraceEntry[]>,
  events: SimEventDoc[],
  horizon: number,
): ScrubberFrame[] {
  const highlights = coupledTicks(events);
  const frames: ScrubberFrame[] = [];
  for (let tick = 0; tick <= horizon; tick++) {
    const states: Record<string, string> = {};
    for (const [diagram, entries] of Object.entries(traces)) {
      states[diagram] = stateAt(entries, tick);
    }
    const coupled = [...highlights.entries()]
      .filter(([, ticks]) => ticks.includes(tick))
      .map(([diagram]) => diagram)
      .sort();
    frames.push({ tick, states, coupled });
  }
  return frames;
}

// -- distribution timeline -----------------------------------------------------------

export interface TimelineBand {
  state: string;
  /** [tick, count] samples exactly as reported */
  samples: [number, number][];
}

export function occupancyTimeline(report: RetrospectResponse): TimelineBand[] {
  return report.occupancy.map((entry) => ({
    state: entry.state,
    samples: entry.samples.map(([t, n]) => [t, n] as [number, number]),
  }));
}

// -- divergence table ----------------------------------------------------------------

export interface DivergenceRow {
  scheduledTick: number;
  state: string;
  required: number;
  actual: number;
  deviation: number;
  violating: boolean;
}

export function divergenceTable(report: RetrospectResponse): {
  banner: "CONFIRMED" | "REFUTED";
  firstViolationTick: number | null;
  rows: DivergenceRow[];
} {
  return {
    banner: report.verdict,
    firstViolationTick: report.divergence.first_violation_tick,
    rows: report.divergence.entries.map((e: DivergenceEntryDoc) => ({
      scheduledTick: e.scheduled_tick,
      state: e.state,
      required: e.required,
      actual: e.actual,
      deviation: e.deviation,
      violating: e.deviation !== 0,
    })),
  };
}

// -- rule and goal-tree editor ----------------------------------------------------------

export interface RuleRow {
  id: string;
  subsystem: string;
  move: string;
  forbidden: string;
  action: string;
  resources: number;
  duration: number;
  selected: boolean;
}

/** Rules table with a selection (the forecast uses the selected subset). */
export function rulesTable(
  rules: { id: string; subsystem: string; source: string; target: string; forbidden: string; action: string; resources: number; duration: number }[],
  selected?: Set<string>,
): RuleRow[] {
  return rules.map((rule) => ({
    id: rule.id,
    subsystem: rule.subsystem,
    move: `${rule.source} → ${rule.target}`,
    forbidden: rule.forbidden,
    action: rule.action,
    resources: rule.resources,
    duration: rule.duration,
    selected: selected ? selected.has(rule.id) : true,
  }));
}

export interface GoalOutlineRow {
  depth: number;
  id: string;
  rule: string | null;
}

/** Depth-first outline of a goal tree; terminals carry their rule id. */
export function goalTreeOutline(root: {
  id: string;
  rule?: string;
  children?: { id: string; rule?: string; children?: unknown[] }[];
}): GoalOutlineRow[] {
  const rows: GoalOutlineRow[] = [];
  const walk = (node: typeof root, depth: number): void => {
    rows.push({ depth, id: node.id, rule: node.rule ?? null });
    for (const child of node.children ?? []) {
      walk(child as typeof root, depth + 1);
    }
  };
  walk(root, 0);
  return rows;
}

// -- forecast panel -------------------------------------------------------------------

export interface ForecastPanel {
  feasible: boolean;
  headline: string;
  planRows: {
    rule: string;
    action: string;
    subsystem: string;
    move: string;
    window: string;
    cumulativeResources: number;
  }[];
  prefixRows: { diagram: string; state: string; deadline: number }[];
}

export function forecastPanel(response: ForecastResponse): ForecastPanel {
  if (response.feasible) {
    return {
      feasible: true,
      headline: `plan: ${response.total_ticks} ticks, ${response.total_resources} resources`,
      planRows: (response.steps ?? []).map((step) => ({
        rule: step.rule,
        action: step.action,
        subsystem: step.subsystem,
        move: `${step.from} → ${step.to}`,
        window: `t${step.started}–t${step.completed}`,
        cumulativeResources: step.cumulative_resources,
      })),
      prefixRows: [],
    };
  }
  const prefix = response.satisfied_prefix ?? [];
  return {
    feasible: false,
    headline:
      prefix.length === 0
        ? "infeasible: no support state reachable"
        : `infeasible: longest satisfiable prefix has ${prefix.length} support state(s)`,
    planRows: [],
    prefixRows: prefix.map((s) => ({ diagram: s.diagram, state: s.state, deadline: s.deadline })),
  };
}
