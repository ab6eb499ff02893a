// Workbench shell: load a bundle into a session, edit the scenario
// schedule, run simulations, scrub traces, forecast against partial
// diagrams, and replay monitoring records retrospectively. Optimistic UI is
// off by design: every state change waits for engine confirmation, and all
// 4xx reports are rendered verbatim.

import { EngineClient, EngineError } from "./api.js";
import type { BundleDoc, ScenarioDoc, SimEventDoc, TraceEntry } from "./types.js";
import {
  addScheduleRow,
  divergenceTable,
  exportScenario,
  forecastPanel,
  goalTreeOutline,
  layoutCanonical,
  layoutControl,
  metricsPanel,
  occupancyTimeline,
  removeScheduleRow,
  rulesTable,
  scheduleRows,
  scrubberFrames,
} from "./viewmodel.js";
import {
  el,
  renderDiagram,
  renderDivergence,
  renderForecast,
  renderGauges,
  renderGoalOutline,
  renderRules,
  renderScrubberFrame,
  renderTimeline,
} from "./render.js";

interface WorkbenchState {
  client: EngineClient;
  session: string | null;
  bundle: BundleDoc | null;
  draft: ScenarioDoc | null;
  selectedRules: Set<string>;
  lastRun: { id: string; horizon: number; traces: Record<string, TraceEntry[]>; events: SimEventDoc[] } | null;
}

const state: WorkbenchState = {
  client: new EngineClient(""),
  session: null,
  bundle: null,
  draft: null,
  selectedRules: new Set(),
  lastRun: null,
};

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showError(error: unknown): void {
  const box = byId("errors");
  box.textContent = "";
  if (error instanceof EngineError) {
    box.append(el("div", { class: "error" }, [`${error.body.code}: ${error.body.message}`]));
    for (const line of error.body.report ?? []) {
      box.append(el("div", { class: "error-line" }, [line]));
    }
  } else {
    box.append(el("div", { class: "error" }, [String(error)]));
  }
}

function clearError(): void {
  byId("errors").textContent = "";
}

async function loadBundle(text: string): Promise<void> {
  const document_ = JSON.parse(text) as BundleDoc;
  const created = await state.client.createSession(document_);
  state.session = created.session;
  state.bundle = await state.client.getModel(created.session);
  const scenarios = state.bundle.scenarios ?? [];
  state.draft = scenarios.length ? JSON.parse(JSON.stringify(scenarios[0])) : null;
  state.selectedRules = new Set((state.bundle.rules ?? []).map((r) => r.id));
  state.lastRun = null;
  byId("session-label").textContent = `session ${created.session}`;
  renderModel();
  renderScheduleEditor();
  renderRuleEditor();
}

function renderRuleEditor(): void {
  const host = byId("rules");
  host.textContent = "";
  if (!state.bundle) return;
  const rules = state.bundle.rules ?? [];
  if (rules.length) {
    host.append(
      renderRules(rulesTable(rules, state.selectedRules), (id, selected) => {
        if (selected) state.selectedRules.add(id);
        else state.selectedRules.delete(id);
      }),
    );
  }
  for (const tree of state.bundle.goal_trees ?? []) {
    host.append(el("h4", {}, [`goal tree ${tree.id}`]));
    host.append(renderGoalOutline(goalTreeOutline(tree.root)));
  }
}

function renderModel(): void {
  const host = byId("diagrams");
  host.textContent = "";
  if (!state.bundle) return;
  for (const doc of state.bundle.control_diagrams ?? []) {
    host.append(el("h3", {}, [`${doc.id} (control)`]));
    host.append(renderDiagram(layoutControl(doc)));
  }
  for (const doc of state.bundle.canonical_diagrams ?? []) {
    host.append(el("h3", {}, [`${doc.id} (canonical)`]));
    host.append(renderDiagram(layoutCanonical(doc)));
  }
}

function renderScheduleEditor(): void {
  const host = byId("schedule");
  host.textContent = "";
  if (!state.draft) {
    host.append(el("p", {}, ["bundle has no scenario"]));
    return;
  }
  const table = el("table", { class: "schedule-table" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["tick"]),
      el("th", {}, ["symbol"]),
      el("th", {}, ["addressee"]),
      el("th", {}, [""]),
    ]),
  );
  for (const row of scheduleRows(state.draft)) {
    const remove = el("button", { type: "button" }, ["remove"]);
    remove.addEventListener("click", () => {
      void commitDraft(removeScheduleRow(state.draft!, row.index));
    });
    table.append(
      el("tr", {}, [
        el("td", {}, [String(row.tick)]),
        el("td", {}, [row.symbol]),
        el("td", {}, [row.addressee || "(broadcast)"]),
        el("td", {}, [remove]),
      ]),
    );
  }
  host.append(table);

  const tick = el("input", { type: "number", value: "0", id: "new-tick" });
  const symbol = el("input", { type: "text", placeholder: "symbol", id: "new-symbol" });
  const addressee = el("input", { type: "text", placeholder: "addressee (empty = broadcast)", id: "new-addressee" });
  const add = el("button", { type: "button" }, ["add row"]);
  add.addEventListener("click", () => {
    void commitDraft(
      addScheduleRow(state.draft!, {
        tick: Number(tick.value),
        symbol: symbol.value,
        addressee: addressee.value,
      }),
    );
  });
  host.append(el("div", { class: "schedule-add" }, [tick, symbol, addressee, add]));

  const exportButton = el("button", { type: "button" }, ["export scenario JSON"]);
  exportButton.addEventListener("click", () => {
    byId("export-target").textContent = exportScenario(state.draft!);
  });
  host.append(exportButton);
}

async function commitDraft(edited: ScenarioDoc): Promise<void> {
  if (!state.session) return;
  try {
    await state.client.putScenario(state.session, edited);
    clearError();
    state.draft = edited;
    renderScheduleEditor();
  } catch (error) {
    showError(error); // draft unchanged: the engine rejected the edit
  }
}

async function runSimulation(horizon: number): Promise<void> {
  if (!state.session || !state.draft) return;
  const result = await state.client.simulate(state.session, horizon);
  const traces: Record<string, TraceEntry[]> = {};
  for (const diagram of Object.keys(result.final_states)) {
    const page = await state.client.trace(state.session, result.run, diagram);
    traces[diagram] = page.entries;
  }
  const events = (await state.client.events(state.session, result.run)).events;
  state.lastRun = { id: result.run, horizon: result.horizon, traces, events };
  byId("metrics").textContent = "";
  byId("metrics").append(renderGauges(metricsPanel(result.metrics)));
  renderScrubber(0);
}

function renderScrubber(tick: number): void {
  const host = byId("scrubber");
  host.textContent = "";
  if (!state.lastRun) return;
  const frames = scrubberFrames(state.lastRun.traces, state.lastRun.events, state.lastRun.horizon);
  const slider = el("input", {
    type: "range",
    min: "0",
    max: String(state.lastRun.horizon),
    value: String(tick),
  });
  slider.addEventListener("input", () => renderScrubber(Number(slider.value)));
  host.append(slider);
  host.append(renderScrubberFrame(frames[tick]));
}

async function runForecast(partialId: string, pool: number): Promise<void> {
  if (!state.session) return;
  const allRules = (state.bundle?.rules ?? []).map((r) => r.id);
  const selection = allRules.filter((id) => state.selectedRules.has(id));
  const response = await state.client.forecast(state.session, {
    partialDiagram: partialId,
    pool,
    rules: selection.length === allRules.length ? undefined : selection,
  });
  byId("forecast").textContent = "";
  byId("forecast").append(renderForecast(forecastPanel(response)));
}

async function runRetrospect(body: {
  diagram: string;
  interval: [number, number];
  snapshots: number[];
  records: { source: string; object: string; parameter: string; tick: number; value: number }[];
}): Promise<void> {
  if (!state.session) return;
  const report = await state.client.retrospect(state.session, body);
  const host = byId("retrospect");
  host.textContent = "";
  host.append(renderDivergence(divergenceTable(report)));
  host.append(renderTimeline(occupancyTimeline(report)));
}

export function boot(): void {
  state.client = new EngineClient("");
  byId("load-button").addEventListener("click", () => {
    const text = (byId("bundle-input") as HTMLTextAreaElement).value;
    loadBundle(text).then(clearError).catch(showError);
  });
  byId("run-button").addEventListener("click", () => {
    const horizon = Number((byId("horizon-input") as HTMLInputElement).value);
    runSimulation(horizon).then(clearError).catch(showError);
  });
  byId("forecast-button").addEventListener("click", () => {
    const partial = (byId("partial-input") as HTMLInputElement).value;
    const pool = Number((byId("pool-input") as HTMLInputElement).value);
    runForecast(partial, pool).then(clearError).catch(showError);
  });
  byId("retrospect-button").addEventListener("click", () => {
    const diagram = (byId("retro-diagram") as HTMLInputElement).value;
    const interval = (byId("retro-interval") as HTMLInputElement).value.split(":").map(Number);
    const snapshots = (byId("retro-snapshots") as HTMLInputElement).value
      .split(",")
      .map((s) => Number(s.trim()));
    const records = JSON.parse((byId("retro-records") as HTMLTextAreaElement).value);
    runRetrospect({
      diagram,
      interval: [interval[0], interval[1]],
      snapshots,
      records,
    })
      .then(clearError)
      .catch(showError);
  });
}
