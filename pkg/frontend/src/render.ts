// DOM and SVG builders for view models. Rendering only: values arrive
// preformatted from viewmodel.ts.

import type { DiagramLayout, ForecastPanel, Gauge, ScrubberFrame, TimelineBand } from "./viewmodel.js";
import type { DivergenceRow } from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export function renderDiagram(layout: DiagramLayout, highlight: string | null = null): SVGElement {
  const radius = 26;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    width: String(layout.width),
    height: String(layout.height),
    class: "diagram",
    "data-diagram": layout.id,
  });
  const marker = svgEl("marker", {
    id: `arrow-${layout.id}`,
    viewBox: "0 0 10 10",
    refX: "9",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  const tip = svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#52606d" });
  marker.append(tip);
  const defs = svgEl("defs");
  defs.append(marker);
  svg.append(defs);

  const at = new Map(layout.nodes.map((n) => [n.id, n]));
  for (const edge of layout.edges) {
    const a = at.get(edge.src);
    const b = at.get(edge.dst);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const length = Math.hypot(dx, dy) || 1;
    const sx = a.x + (dx / length) * radius;
    const sy = a.y + (dy / length) * radius;
    const ex = b.x - (dx / length) * (radius + 4);
    const ey = b.y - (dy / length) * (radius + 4);
    const line = svgEl("line", {
      x1: String(sx),
      y1: String(sy),
      x2: String(ex),
      y2: String(ey),
      class: edge.dashed ? "edge dashed" : "edge",
      "marker-end": `url(#arrow-${layout.id})`,
    });
    svg.append(line);
    const label = svgEl("text", {
      x: String((sx + ex) / 2),
      y: String((sy + ey) / 2 - 6),
      class: "edge-label",
    });
    label.textContent = edge.label;
    svg.append(label);
  }
  for (const node of layout.nodes) {
    const group = svgEl("g", { class: "node", "data-state": node.id });
    const classes = ["state"];
    if (node.isInitial) classes.push("initial");
    if (node.isFinal) classes.push("final");
    if (node.id === highlight) classes.push("current");
    const circle = svgEl("circle", {
      cx: String(node.x),
      cy: String(node.y),
      r: String(radius),
      class: classes.join(" "),
    });
    const text = svgEl("text", {
      x: String(node.x),
      y: String(node.y + 4),
      class: "state-label",
      "text-anchor": "middle",
    });
    text.textContent = node.id;
    group.append(circle, text);
    svg.append(group);
  }
  return svg;
}

export function renderGauges(gauges: Gauge[]): HTMLElement {
  const panel = el("div", { class: "metric-panel" });
  for (const gauge of gauges) {
    panel.append(
      el("div", { class: "gauge", "data-metric": gauge.name }, [
        el("div", { class: "gauge-value" }, [gauge.display]),
        el("div", { class: "gauge-name" }, [gauge.name]),
      ]),
    );
  }
  return panel;
}

export function renderScrubberFrame(frame: ScrubberFrame): HTMLElement {
  const box = el("div", { class: "scrubber-frame" });
  box.append(el("div", { class: "scrubber-tick" }, [`tick ${frame.tick}`]));
  const list = el("ul", { class: "scrubber-states" });
  for (const [diagram, state] of Object.entries(frame.states)) {
    const item = el(
      "li",
      frame.coupled.includes(diagram) ? { class: "coupled" } : {},
      [`${diagram}: ${state}`],
    );
    list.append(item);
  }
  box.append(list);
  return box;
}

export function renderTimeline(bands: TimelineBand[]): HTMLElement {
  const table = el("table", { class: "timeline" });
  const ticks = [...new Set(bands.flatMap((b) => b.samples.map(([t]) => t)))].sort((x, y) => x - y);
  const head = el("tr", {}, [el("th", {}, ["state"])]);
  for (const t of ticks) head.append(el("th", {}, [`t${t}`]));
  table.append(head);
  for (const band of bands) {
    const row = el("tr", {}, [el("td", {}, [band.state])]);
    const byTick = new Map(band.samples);
    for (const t of ticks) {
      const count = byTick.get(t);
      row.append(el("td", { class: "count" }, [count === undefined ? "" : String(count)]));
    }
    table.append(row);
  }
  return table;
}

export function renderDivergence(view: {
  banner: "CONFIRMED" | "REFUTED";
  firstViolationTick: number | null;
  rows: DivergenceRow[];
}): HTMLElement {
  const box = el("div", { class: "divergence" });
  const banner = el("div", { class: `banner ${view.banner.toLowerCase()}` }, [view.banner]);
  if (view.firstViolationTick !== null) {
    banner.append(` (first violation at tick ${view.firstViolationTick})`);
  }
  box.append(banner);
  const table = el("table", { class: "divergence-table" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["tick"]),
      el("th", {}, ["state"]),
      el("th", {}, ["required"]),
      el("th", {}, ["actual"]),
      el("th", {}, ["deviation"]),
    ]),
  );
  for (const row of view.rows) {
    table.append(
      el("tr", row.violating ? { class: "violating" } : {}, [
        el("td", {}, [String(row.scheduledTick)]),
        el("td", {}, [row.state]),
        el("td", {}, [String(row.required)]),
        el("td", {}, [String(row.actual)]),
        el("td", {}, [row.deviation > 0 ? `+${row.deviation}` : String(row.deviation)]),
      ]),
    );
  }
  box.append(table);
  return box;
}

export function renderRules(
  rows: import("./viewmodel.js").RuleRow[],
  onToggle: (id: string, selected: boolean) => void,
): HTMLElement {
  const table = el("table", { class: "rules-table" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["use"]),
      el("th", {}, ["rule"]),
      el("th", {}, ["subsystem"]),
      el("th", {}, ["move"]),
      el("th", {}, ["guards against"]),
      el("th", {}, ["cost"]),
      el("th", {}, ["ticks"]),
    ]),
  );
  for (const row of rows) {
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = row.selected;
    box.addEventListener("change", () => onToggle(row.id, box.checked));
    table.append(
      el("tr", {}, [
        el("td", {}, [box]),
        el("td", {}, [row.id]),
        el("td", {}, [row.subsystem]),
        el("td", {}, [row.move]),
        el("td", {}, [row.forbidden]),
        el("td", {}, [String(row.resources)]),
        el("td", {}, [String(row.duration)]),
      ]),
    );
  }
  return table;
}

export function renderGoalOutline(rows: import("./viewmodel.js").GoalOutlineRow[]): HTMLElement {
  const list = el("ul", { class: "goal-outline" });
  for (const row of rows) {
    const label = row.rule === null ? row.id : `${row.id} — rule ${row.rule}`;
    const item = el("li", { style: `margin-left: ${row.depth * 1.2}rem` }, [label]);
    list.append(item);
  }
  return list;
}

export function renderForecast(panel: ForecastPanel): HTMLElement {
  const box = el("div", { class: `forecast ${panel.feasible ? "feasible" : "infeasible"}` });
  box.append(el("div", { class: "forecast-headline" }, [panel.headline]));
  if (panel.feasible) {
    const table = el("table", { class: "plan-table" });
    table.append(
      el("tr", {}, [
        el("th", {}, ["rule"]),
        el("th", {}, ["action"]),
        el("th", {}, ["subsystem"]),
        el("th", {}, ["move"]),
        el("th", {}, ["window"]),
        el("th", {}, ["spent"]),
      ]),
    );
    for (const row of panel.planRows) {
      table.append(
        el("tr", {}, [
          el("td", {}, [row.rule]),
          el("td", {}, [row.action]),
          el("td", {}, [row.subsystem]),
          el("td", {}, [row.move]),
          el("td", {}, [row.window]),
          el("td", {}, [String(row.cumulativeResources)]),
        ]),
      );
    }
    box.append(table);
  } else {
    const list = el("ul", { class: "prefix-list" });
    for (const row of panel.prefixRows) {
      list.append(el("li", {}, [`${row.diagram} reaches ${row.state} by t${row.deadline}`]));
    }
    box.append(list);
  }
  return box;
}
