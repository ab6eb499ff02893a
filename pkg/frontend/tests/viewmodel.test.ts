// View-model unit tests: payload values must flow through untouched.

import { describe, expect, it } from "vitest";

import type {
  CanonicalDiagramDoc,
  ForecastResponse,
  Metrics,
  RetrospectResponse,
  ScenarioDoc,
  SimEventDoc,
  TraceEntry,
} from "../src/types.js";
import {
  addScheduleRow,
  divergenceTable,
  exportScenario,
  forecastPanel,
  goalTreeOutline,
  layoutCanonical,
  layoutControl,
  metricsPanel,
  removeScheduleRow,
  rulesTable,
  scheduleRows,
  scrubberFrames,
  stateAt,
  updateScheduleRow,
} from "../src/viewmodel.js";

const MINIMAL_DIAGRAM: CanonicalDiagramDoc = {
  id: "d",
  states: [
    { id: "A", rank: 0 },
    { id: "B", rank: 1 },
  ],
  dev_arcs: [{ src: "A", dst: "B" }],
  initial: "A",
  final: "B",
};

describe("diagram layout", () => {
  it("renders the minimal bundle as 2 nodes and 1 arc", () => {
    const layout = layoutCanonical(MINIMAL_DIAGRAM);
    expect(layout.nodes).toHaveLength(2);
    expect(layout.edges).toHaveLength(1);
    expect(layout.edges[0]).toEqual({ src: "A", dst: "B", label: "Δ1", dashed: false });
  });

  it("orders nodes left to right by rank", () => {
    const layout = layoutCanonical({
      ...MINIMAL_DIAGRAM,
      states: [
        { id: "B", rank: 1 },
        { id: "A", rank: 0 },
        { id: "C", rank: 2 },
      ],
      final: "C",
    });
    const xs = new Map(layout.nodes.map((n) => [n.id, n.x]));
    expect(xs.get("A")!).toBeLessThan(xs.get("B")!);
    expect(xs.get("B")!).toBeLessThan(xs.get("C")!);
  });

  it("draws backstep and decay arcs dashed", () => {
    const canonical = layoutCanonical({
      ...MINIMAL_DIAGRAM,
      back_arcs: [{ src: "B", dst: "A", delta: 2 }],
    });
    expect(canonical.edges.find((e) => e.src === "B")).toMatchObject({ dashed: true, label: "Δ2" });

    const control = layoutControl({
      id: "c",
      states: [
        { id: "A", rank: 0 },
        { id: "B", rank: 1 },
      ],
      initial: "A",
      final: "B",
      alphabet: [{ id: "x", kind: "individual" }],
      triggered_arcs: [{ src: "A", dst: "B", symbol: "x" }],
      decay_arcs: [{ src: "B", dst: "A", threshold: 3 }],
    });
    expect(control.edges).toEqual([
      { src: "A", dst: "B", label: "x", dashed: false },
      { src: "B", dst: "A", label: "idle≥3", dashed: true },
    ]);
  });

  it("marks initial and final states", () => {
    const layout = layoutCanonical(MINIMAL_DIAGRAM);
    expect(layout.nodes.find((n) => n.id === "A")?.isInitial).toBe(true);
    expect(layout.nodes.find((n) => n.id === "B")?.isFinal).toBe(true);
  });
});

describe("metric panel", () => {
  it("carries engine values exactly", () => {
    const metrics: Metrics = {
      completeness: 1.0,
      redundancy_count: 1,
      omitted_possibilities: 0,
      complexness: 3 / 7,
    };
    const gauges = metricsPanel(metrics);
    expect(gauges.map((g) => g.name)).toEqual([
      "completeness",
      "redundancy",
      "omitted possibilities",
      "complexness",
    ]);
    expect(gauges[0].value).toBe(1.0);
    expect(gauges[0].display).toBe("1.000");
    expect(gauges[1].value).toBe(1);
    expect(gauges[3].value).toBe(3 / 7); // exact payload value, no rounding
  });
});

const DRAFT: ScenarioDoc = {
  id: "s",
  diagrams: ["d"],
  mapping: { root: "d" },
  schedule: [{ tick: 0, symbol: "x", addressee: "d" }],
};

describe("schedule editing", () => {
  it("lists rows with broadcast as empty addressee", () => {
    const rows = scheduleRows({ ...DRAFT, schedule: [{ tick: 2, symbol: "g" }] });
    expect(rows).toEqual([{ index: 0, tick: 2, symbol: "g", addressee: "" }]);
  });

  it("add/update/remove are pure", () => {
    const added = addScheduleRow(DRAFT, { tick: 1, symbol: "y", addressee: "" });
    expect(added.schedule).toHaveLength(2);
    expect(added.schedule![1]).toEqual({ tick: 1, symbol: "y" });
    expect(DRAFT.schedule).toHaveLength(1); // source untouched

    const updated = updateScheduleRow(added, 1, { tick: 3, symbol: "y", addressee: "d" });
    expect(updated.schedule![1]).toEqual({ tick: 3, symbol: "y", addressee: "d" });

    const removed = removeScheduleRow(updated, 0);
    expect(removed.schedule).toEqual([{ tick: 3, symbol: "y", addressee: "d" }]);

    expect(() => removeScheduleRow(removed, 5)).toThrow();
  });

  it("export is the draft document verbatim", () => {
    const text = exportScenario(DRAFT);
    expect(JSON.parse(text)).toEqual(DRAFT);
  });
});

describe("trace scrubber", () => {
  const trace: TraceEntry[] = [
    { tick: 0, state: "A", cause: "initial" },
    { tick: 4, state: "B", cause: "symbol" },
  ];

  it("reads the step function", () => {
    expect(stateAt(trace, 0)).toBe("A");
    expect(stateAt(trace, 3)).toBe("A");
    expect(stateAt(trace, 4)).toBe("B");
    expect(stateAt(trace, 9)).toBe("B");
  });

  it("highlights coupled completions", () => {
    const events: SimEventDoc[] = [
      { tick: 4, kind: "complete", diagram: "d", src: "A", dst: "B", cause: "symbol", group: "G" },
      { tick: 2, kind: "complete", diagram: "e", src: "P", dst: "Q", cause: "symbol" },
    ];
    const frames = scrubberFrames({ d: trace }, events, 5);
    expect(frames).toHaveLength(6);
    expect(frames[4].coupled).toEqual(["d"]);
    expect(frames[2].coupled).toEqual([]);
    expect(frames[5].states).toEqual({ d: "B" });
  });
});

const RETRO: RetrospectResponse = {
  diagram: "dev",
  classifier: "bands",
  verdict: "REFUTED",
  snapshots: [0, 4],
  occupancy: [
    { state: "S0", samples: [[0, 4], [4, 1]] },
    { state: "S1", samples: [[0, 0], [4, 3]] },
  ],
  arc_counts: [{ src: "S0", dst: "S1", count: 3 }],
  divergence: {
    verdict: "REFUTED",
    first_violation_tick: 4,
    entries: [
      { scheduled_tick: 4, matched_tick: 4, state: "S0", required: 0, actual: 1, deviation: 1 },
      { scheduled_tick: 4, matched_tick: 4, state: "S1", required: 4, actual: 3, deviation: -1 },
    ],
  },
};

describe("divergence table", () => {
  it("renders banner, first violation, and exact counts", () => {
    const view = divergenceTable(RETRO);
    expect(view.banner).toBe("REFUTED");
    expect(view.firstViolationTick).toBe(4);
    expect(view.rows[0]).toEqual({
      scheduledTick: 4,
      state: "S0",
      required: 0,
      actual: 1,
      deviation: 1,
      violating: true,
    });
  });
});

describe("rule and goal-tree editor", () => {
  const RULES = [
    {
      id: "push1",
      subsystem: "c1",
      source: "S14",
      target: "S15",
      forbidden: "S11",
      action: "invest",
      resources: 2,
      duration: 1,
    },
  ];

  it("rules table carries costs and durations exactly", () => {
    const rows = rulesTable(RULES, new Set(["push1"]));
    expect(rows[0]).toEqual({
      id: "push1",
      subsystem: "c1",
      move: "S14 → S15",
      forbidden: "S11",
      action: "invest",
      resources: 2,
      duration: 1,
      selected: true,
    });
    expect(rulesTable(RULES, new Set())[0].selected).toBe(false);
  });

  it("goal tree outlines depth-first with terminal rules", () => {
    const outline = goalTreeOutline({
      id: "goal",
      children: [
        { id: "stage1", rule: "push1" },
        { id: "late", children: [{ id: "stage2", rule: "push2" }] },
      ],
    });
    expect(outline).toEqual([
      { depth: 0, id: "goal", rule: null },
      { depth: 1, id: "stage1", rule: "push1" },
      { depth: 1, id: "late", rule: null },
      { depth: 2, id: "stage2", rule: "push2" },
    ]);
  });
});

describe("forecast panel", () => {
  it("feasible plans become ordered rows", () => {
    const response: ForecastResponse = {
      partial_diagram: "p",
      feasible: true,
      total_ticks: 3,
      total_resources: 5,
      steps: [
        {
          rule: "push1",
          subsystem: "c1",
          action: "invest",
          from: "S14",
          to: "S15",
          started: 0,
          completed: 1,
          cumulative_resources: 2,
        },
      ],
      support_chain: [],
      predicted_diagram: { states: [], dev_arcs: [] },
    };
    const panel = forecastPanel(response);
    expect(panel.feasible).toBe(true);
    expect(panel.headline).toBe("plan: 3 ticks, 5 resources");
    expect(panel.planRows[0].window).toBe("t0–t1");
    expect(panel.planRows[0].cumulativeResources).toBe(2);
  });

  it("infeasible responses surface the longest prefix", () => {
    const response: ForecastResponse = {
      partial_diagram: "p",
      feasible: false,
      satisfied_prefix: [{ diagram: "c1", state: "S15", deadline: 2 }],
      frontier: [],
    };
    const panel = forecastPanel(response);
    expect(panel.feasible).toBe(false);
    expect(panel.headline).toContain("1 support state");
    expect(panel.prefixRows).toEqual([{ diagram: "c1", state: "S15", deadline: 2 }]);
  });
});
