"""Controllable-development automata and scenario simulation.

A control diagram moves on symbol-triggered arcs and falls back on decay
arcs when left without input. Scenarios bundle diagrams, a hierarchy
mapping, a timed symbol schedule, and an after-effect scheme of coupled
groups that propagates transitions across hierarchy levels.

The tick-step order is fixed: complete pending transitions, deliver
scheduled symbols, apply upward after-effects, then decay. Stimulus precedes
consequence precedes neglect; simulation is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import AmbiguousArc, MalformedScenario
from .model import (
    MetricTrace,
    ParameterHierarchy,
    State,
    StateTrace,
    StateTraceEntry,
    TransitionCause,
)

BROADCAST = None  # schedule addressee for "every diagram that knows the symbol"


class SymbolKind(str, Enum):
    INDIVIDUAL = "individual"  # moves one subsystem, influences nothing else
    GENERAL = "general"  # bound to a parent-arc, couples hierarchy levels


@dataclass(frozen=True)
class SymbolDef:
    id: str
    kind: SymbolKind


@dataclass(frozen=True)
class TriggeredArc:
    """Transition initiated by an input symbol, taking `delta` ticks."""

    src: str
    dst: str
    symbol: str
    delta: int = 1


@dataclass(frozen=True)
class DecayArc:
    """Backstep taken after `threshold` ticks without any transition."""

    src: str
    dst: str
    threshold: int


@dataclass(frozen=True)
class ControlDiagram:
    """What-if hypothesis automaton: symbol-triggered arcs plus decay arcs."""

    id: str
    states: tuple[State, ...]
    initial: str
    final: str
    alphabet: tuple[SymbolDef, ...]
    triggered_arcs: tuple[TriggeredArc, ...]
    decay_arcs: tuple[DecayArc, ...] = ()

    def rank_of(self, state_id: str) -> int:
        for s in self.states:
            if s.id == state_id:
                return s.rank
        raise KeyError(state_id)

    def symbol_kind(self, symbol: str) -> SymbolKind | None:
        for sym in self.alphabet:
            if sym.id == symbol:
                return sym.kind
        return None

    def arcs_for(self, symbol: str) -> tuple[TriggeredArc, ...]:
        return tuple(a for a in self.triggered_arcs if a.symbol == symbol)

    def triggered_arc(self, src: str, dst: str) -> TriggeredArc | None:
        for arc in self.triggered_arcs:
            if arc.src == src and arc.dst == dst:
                return arc
        return None

    def decay_from(self, state_id: str) -> DecayArc | None:
        for arc in self.decay_arcs:
            if arc.src == state_id:
                return arc
        return None


def validate_control_diagram(diagram: ControlDiagram) -> list[str]:
    """Structural check; one line per violation, empty means valid."""
    problems: list[str] = []
    ranks: dict[str, int] = {}
    for s in diagram.states:
        if s.id in ranks:
            problems.append(f"duplicate state id: {s.id}")
        ranks[s.id] = s.rank
    symbols = {s.id for s in diagram.alphabet}

    for endpoint, site in ((diagram.initial, "initial"), (diagram.final, "final")):
        if endpoint not in ranks:
            problems.append(f"{site} state '{endpoint}' unknown")
    for arc in diagram.triggered_arcs:
        if arc.src not in ranks or arc.dst not in ranks:
            problems.append(f"triggered arc ({arc.src},{arc.dst}) references unknown state")
            continue
        if arc.symbol not in symbols:
            problems.append(f"arc ({arc.src},{arc.dst}) uses undeclared symbol '{arc.symbol}'")
        if arc.delta < 1:
            problems.append(f"arc ({arc.src},{arc.dst}) has non-positive delta")
    triggered_keys = {(a.src, a.dst) for a in diagram.triggered_arcs}
    decay_sources: set[str] = set()
    for arc in diagram.decay_arcs:
        if arc.src not in ranks or arc.dst not in ranks:
            problems.append(f"decay arc ({arc.src},{arc.dst}) references unknown state")
            continue
        if (arc.src, arc.dst) in triggered_keys:
            problems.append(f"arc ({arc.src},{arc.dst}) is both triggered and decay")
        if ranks[arc.dst] >= ranks[arc.src]:
            problems.append(f"decay arc must decrease rank: ({arc.src},{arc.dst})")
        if arc.threshold < 1:
            problems.append(f"decay arc ({arc.src},{arc.dst}) has non-positive threshold")
        if arc.src in decay_sources:
            problems.append(f"state '{arc.src}' has two decay arcs")
        decay_sources.add(arc.src)
    return problems


@dataclass(frozen=True)
class ArcRef:
    """An arc named across diagrams."""

    diagram: str
    src: str
    dst: str


@dataclass(frozen=True)
class CoupledGroup:
    """A parent-arc bound to child-arcs of lower-level subsystems.

    Firing the parent arc (by a general symbol) fires the child arcs as a
    consequence; conversely, once the upward policy is met by fired child
    arcs, the parent arc fires. `upward_required` of None means all child
    arcs must have fired; an integer k means at least k.
    """

    id: str
    parent_arc: ArcRef
    child_arcs: tuple[ArcRef, ...]
    upward_required: int | None = None

    def __post_init__(self) -> None:
        if not self.child_arcs:
            raise ValueError(f"coupled group '{self.id}' has no child arcs")
        if self.upward_required is not None and not (
            1 <= self.upward_required <= len(self.child_arcs)
        ):
            raise ValueError(
                f"coupled group '{self.id}': upward_required must be in "
                f"[1, {len(self.child_arcs)}]"
            )


@dataclass(frozen=True)
class ScheduleEntry:
    """One symbol delivery; addressee None broadcasts to every diagram
    whose alphabet contains the symbol."""

    tick: int
    symbol: str
    addressee: str | None = None


@dataclass(frozen=True)
class Scenario:
    """Development-controlling scenario: diagrams, hierarchy, the node-to-
    diagram mapping, the timed symbol schedule, and the after-effect scheme.

    `lenient_coupling` lets a general symbol fire the parent arc with only
    the ready child arcs; the default demands every child at its source.
    """

    id: str
    diagrams: Mapping[str, ControlDiagram]
    hierarchy: ParameterHierarchy
    mapping: Mapping[str, str]
    schedule: tuple[ScheduleEntry, ...]
    coupling: tuple[CoupledGroup, ...] = ()
    lenient_coupling: bool = False

    def diagram_node(self, diagram_id: str) -> str | None:
        for node, mapped in self.mapping.items():
            if mapped == diagram_id:
                return node
        return None


def validate_scenario(scenario: Scenario) -> list[str]:
    """Load-time well-formedness report for a scenario."""
    problems: list[str] = []
    for diagram_id, diagram in scenario.diagrams.items():
        for line in validate_control_diagram(diagram):
            problems.append(f"diagram '{diagram_id}': {line}")

    for node, diagram_id in scenario.mapping.items():
        if node not in scenario.hierarchy.nodes:
            problems.append(f"mapping references unknown hierarchy node '{node}'")
        if diagram_id not in scenario.diagrams:
            problems.append(f"mapping references unknown diagram '{diagram_id}'")

    parent_arcs = {
        (g.parent_arc.diagram, g.parent_arc.src, g.parent_arc.dst): g
        for g in scenario.coupling
    }
    for group in scenario.coupling:
        refs = (group.parent_arc, *group.child_arcs)
        for ref in refs:
            diagram = scenario.diagrams.get(ref.diagram)
            if diagram is None:
                problems.append(f"group '{group.id}' references unknown diagram '{ref.diagram}'")
                continue
            if diagram.triggered_arc(ref.src, ref.dst) is None:
                problems.append(
                    f"group '{group.id}': ({ref.src},{ref.dst}) is not a triggered arc "
                    f"of '{ref.diagram}'"
                )
        child_diagrams = [ref.diagram for ref in group.child_arcs]
        if len(child_diagrams) != len(set(child_diagrams)):
            problems.append(f"group '{group.id}': child arcs must belong to distinct diagrams")
        parent_node = scenario.diagram_node(group.parent_arc.diagram)
        if parent_node is not None:
            child_nodes = set(scenario.hierarchy.children_of(parent_node))
            for ref in group.child_arcs:
                child_node = scenario.diagram_node(ref.diagram)
                if child_node is not None and child_node not in child_nodes:
                    problems.append(
                        f"group '{group.id}': diagram '{ref.diagram}' is not a hierarchy "
                        f"child of '{group.parent_arc.diagram}'"
                    )

    for entry in scenario.schedule:
        if entry.tick < 0:
            problems.append(f"schedule tick {entry.tick} negative")
        targets = (
            [entry.addressee]
            if entry.addressee is not None
            else list(scenario.diagrams)
        )
        if entry.addressee is not None and entry.addressee not in scenario.diagrams:
            problems.append(f"schedule addresses unknown diagram '{entry.addressee}'")
            continue
        for target in targets:
            diagram = scenario.diagrams.get(target)
            if diagram is None:
                continue
            kind = diagram.symbol_kind(entry.symbol)
            if entry.addressee is not None and kind is None:
                problems.append(
                    f"schedule sends '{entry.symbol}' to '{target}', which does not "
                    "declare it"
                )
            if kind is SymbolKind.GENERAL:
                covered = any(
                    (target, arc.src, arc.dst) in parent_arcs
                    for arc in diagram.arcs_for(entry.symbol)
                )
                if not covered:
                    problems.append(
                        f"general symbol '{entry.symbol}' to '{target}' triggers no "
                        "parent-arc of any coupled group"
                    )
    return problems


# -- simulation ------------------------------------------------------------------

@dataclass(frozen=True)
class SimEvent:
    """One audit-log record. Kinds:

    delivery    a scheduled symbol reached a diagram (outcome: fired,
                no-enabled-arc, or children-not-ready; the last two count
                as redundant deliveries)
    transition  an arc was initiated (coupled carries the group id)
    complete    a transition finished and the state was entered
    """

    tick: int
    kind: str
    diagram: str | None = None
    symbol: str | None = None
    symbol_kind: str | None = None
    outcome: str | None = None
    src: str | None = None
    dst: str | None = None
    cause: str | None = None
    group: str | None = None
    role: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class ScenarioMetrics:
    """The four scenario quality measures.

    completeness          subsystems that ended in their final state / all
    redundancy_count      deliveries that moved nothing, plus ticks where one
                          subsystem received both an individual and a general
                          symbol
    omitted_possibilities decay transitions taken
    complexness           transitions on coupled arcs / all transitions
    """

    completeness: float
    redundancy_count: int
    omitted_possibilities: int
    complexness: float

    def to_dict(self) -> dict:
        return {
            "completeness": self.completeness,
            "redundancy_count": self.redundancy_count,
            "omitted_possibilities": self.omitted_possibilities,
            "complexness": self.complexness,
        }


@dataclass(frozen=True)
class SimulationResult:
    traces: Mapping[str, StateTrace]
    events: tuple[SimEvent, ...]
    metrics: ScenarioMetrics
    metric_trace: MetricTrace
    final_states: Mapping[str, str]
    horizon: int


@dataclass
class _DiagramRun:
    diagram: ControlDiagram
    state: str
    # (src, dst, completes_at, cause, group id, role)
    pending: tuple[str, str, int, TransitionCause, str | None, str | None] | None = None
    last_event: int = 0
    entries: list[StateTraceEntry] = field(default_factory=list)


def simulate(scenario: Scenario, horizon: int) -> SimulationResult:
    """Run the scenario deterministically for ticks 0..horizon.

    Raises MalformedScenario if load-time validation fails, and AmbiguousArc
    when one symbol enables two arcs from a diagram's current state.
    """
    problems = validate_scenario(scenario)
    if problems:
        raise MalformedScenario(problems)
    last_scheduled = max((e.tick for e in scenario.schedule), default=0)
    if horizon < last_scheduled:
        raise MalformedScenario(
            [f"horizon {horizon} precedes last scheduled tick {last_scheduled}"]
        )

    runs: dict[str, _DiagramRun] = {}
    for diagram_id, diagram in scenario.diagrams.items():
        run = _DiagramRun(diagram=diagram, state=diagram.initial)
        run.entries.append(StateTraceEntry(0, diagram.initial, TransitionCause.INITIAL))
        runs[diagram_id] = run

    schedule = sorted(
        enumerate(scenario.schedule), key=lambda pair: (pair[1].tick, pair[0])
    )
    parent_groups = {
        (g.parent_arc.diagram, g.parent_arc.src, g.parent_arc.dst): g
        for g in scenario.coupling
    }
    fired_arcs: set[tuple[str, str, str]] = set()
    events: list[SimEvent] = []
    metric_entries: list[tuple[int, dict[str, float]]] = []

    def initiate(
        tick: int,
        diagram_id: str,
        arc_src: str,
        arc_dst: str,
        delta: int,
        cause: TransitionCause,
        coupled_group: str | None,
        role: str | None,
    ) -> None:
        run = runs[diagram_id]
        run.pending = (arc_src, arc_dst, tick + delta, cause, coupled_group, role)
        fired_arcs.add((diagram_id, arc_src, arc_dst))
        events.append(
            SimEvent(
                tick=tick,
                kind="transition",
                diagram=diagram_id,
                src=arc_src,
                dst=arc_dst,
                cause=cause.value,
                group=coupled_group,
                role=role,
            )
        )

    def complete(tick: int, diagram_id: str) -> None:
        run = runs[diagram_id]
        assert run.pending is not None
        src, dst, _, cause, group, role = run.pending
        run.state = dst
        run.pending = None
        run.last_event = tick
        run.entries.append(StateTraceEntry(tick, dst, cause))
        events.append(
            SimEvent(
                tick=tick,
                kind="complete",
                diagram=diagram_id,
                src=src,
                dst=dst,
                cause=cause.value,
                group=group,
                role=role,
            )
        )

    def group_ready(group: CoupledGroup) -> list[ArcRef]:
        ready = []
        for ref in group.child_arcs:
            child = runs[ref.diagram]
            if child.pending is None and child.state == ref.src:
                ready.append(ref)
        return ready

    def fire_child(tick: int, group: CoupledGroup, ref: ArcRef) -> None:
        child_arc = runs[ref.diagram].diagram.triggered_arc(ref.src, ref.dst)
        assert child_arc is not None  # load validation guarantees it
        initiate(
            tick,
            ref.diagram,
            ref.src,
            ref.dst,
            child_arc.delta,
            TransitionCause.PROPAGATION,
            group.id,
            "child",
        )

    def deliver(tick: int, entry: ScheduleEntry) -> None:
        targets = (
            [entry.addressee]
            if entry.addressee is not None
            else [d for d in scenario.diagrams if runs[d].diagram.symbol_kind(entry.symbol)]
        )
        for diagram_id in targets:
            run = runs[diagram_id]
            kind = run.diagram.symbol_kind(entry.symbol)
            kind_value = kind.value if kind else None
            if run.pending is not None:
                events.append(
                    SimEvent(
                        tick=tick,
                        kind="delivery",
                        diagram=diagram_id,
                        symbol=entry.symbol,
                        symbol_kind=kind_value,
                        outcome="no-enabled-arc",
                    )
                )
                continue
            enabled = [
                a
                for a in run.diagram.arcs_for(entry.symbol)
                if a.src == run.state
            ]
            if len(enabled) > 1:
                raise AmbiguousArc(tick, diagram_id, entry.symbol, [a.dst for a in enabled])
            if not enabled:
                events.append(
                    SimEvent(
                        tick=tick,
                        kind="delivery",
                        diagram=diagram_id,
                        symbol=entry.symbol,
                        symbol_kind=kind_value,
                        outcome="no-enabled-arc",
                    )
                )
                continue
            arc = enabled[0]
            group = parent_groups.get((diagram_id, arc.src, arc.dst))
            if group is not None and kind is SymbolKind.GENERAL:
                ready = group_ready(group)
                if len(ready) < len(group.child_arcs) and not scenario.lenient_coupling:
                    events.append(
                        SimEvent(
                            tick=tick,
                            kind="delivery",
                            diagram=diagram_id,
                            symbol=entry.symbol,
                            symbol_kind=kind_value,
                            outcome="children-not-ready",
                        )
                    )
                    continue
                events.append(
                    SimEvent(
                        tick=tick,
                        kind="delivery",
                        diagram=diagram_id,
                        symbol=entry.symbol,
                        symbol_kind=kind_value,
                        outcome="fired",
                    )
                )
                initiate(
                    tick, diagram_id, arc.src, arc.dst, arc.delta,
                    TransitionCause.SYMBOL, group.id, "parent",
                )
                for ref in ready:
                    fire_child(tick, group, ref)
                continue
            events.append(
                SimEvent(
                    tick=tick,
                    kind="delivery",
                    diagram=diagram_id,
                    symbol=entry.symbol,
                    symbol_kind=kind_value,
                    outcome="fired",
                )
            )
            initiate(
                tick, diagram_id, arc.src, arc.dst, arc.delta,
                TransitionCause.SYMBOL, None, None,
            )

    def upward_after_effects(tick: int) -> None:
        # a parent arc may become enabled by firings earlier this tick, so
        # iterate to a fixpoint; each group fires at most once per tick
        fired_this_tick: set[str] = set()
        changed = True
        while changed:
            changed = False
            for group in scenario.coupling:
                if group.id in fired_this_tick:
                    continue
                required = (
                    len(group.child_arcs)
                    if group.upward_required is None
                    else group.upward_required
                )
                done = sum(
                    1
                    for ref in group.child_arcs
                    if (ref.diagram, ref.src, ref.dst) in fired_arcs
                )
                if done < required:
                    continue
                parent = runs[group.parent_arc.diagram]
                if parent.pending is not None or parent.state != group.parent_arc.src:
                    continue
                arc = parent.diagram.triggered_arc(group.parent_arc.src, group.parent_arc.dst)
                assert arc is not None
                initiate(
                    tick,
                    group.parent_arc.diagram,
                    arc.src,
                    arc.dst,
                    arc.delta,
                    TransitionCause.PROPAGATION,
                    group.id,
                    "parent",
                )
                fired_this_tick.add(group.id)
                changed = True

    def decay(tick: int) -> None:
        for diagram_id, run in runs.items():
            if run.pending is not None:
                continue
            arc = run.diagram.decay_from(run.state)
            if arc is None:
                continue
            if tick - run.last_event >= arc.threshold:
                run.state = arc.dst
                run.last_event = tick
                run.entries.append(StateTraceEntry(tick, arc.dst, TransitionCause.DECAY))
                fired_arcs.add((diagram_id, arc.src, arc.dst))
                events.append(
                    SimEvent(
                        tick=tick,
                        kind="transition",
                        diagram=diagram_id,
                        src=arc.src,
                        dst=arc.dst,
                        cause=TransitionCause.DECAY.value,
                    )
                )
                events.append(
                    SimEvent(
                        tick=tick,
                        kind="complete",
                        diagram=diagram_id,
                        src=arc.src,
                        dst=arc.dst,
                        cause=TransitionCause.DECAY.value,
                    )
                )

    finals = {d: runs[d].diagram.final for d in scenario.diagrams}
    schedule_index = 0
    for tick in range(horizon + 1):
        for diagram_id in scenario.diagrams:
            run = runs[diagram_id]
            if run.pending is not None and run.pending[2] == tick:
                complete(tick, diagram_id)
        while (
            schedule_index < len(schedule)
            and schedule[schedule_index][1].tick == tick
        ):
            deliver(tick, schedule[schedule_index][1])
            schedule_index += 1
        upward_after_effects(tick)
        decay(tick)
        snapshot = _metrics_from(
            {d: tuple(r.entries) for d, r in runs.items()}, events, finals
        )
        metric_entries.append((tick, snapshot.to_dict()))

    traces = {
        diagram_id: StateTrace(diagram_id, tuple(run.entries))
        for diagram_id, run in runs.items()
    }
    metrics = evaluate_scenario(traces, tuple(events), finals)
    return SimulationResult(
        traces=traces,
        events=tuple(events),
        metrics=metrics,
        metric_trace=MetricTrace(tuple(metric_entries)),
        final_states=finals,
        horizon=horizon,
    )


def _metrics_from(
    entry_map: Mapping[str, tuple[StateTraceEntry, ...]],
    events: Sequence[SimEvent],
    finals: Mapping[str, str],
) -> ScenarioMetrics:
    diagram_count = len(entry_map)
    at_final = sum(
        1 for d, entries in entry_map.items() if entries[-1].state == finals[d]
    )
    completeness = at_final / diagram_count if diagram_count else 1.0

    useless = sum(
        1 for e in events if e.kind == "delivery" and e.outcome != "fired"
    )
    mixed_input_pairs = set()
    kinds_seen: dict[tuple[int, str], set[str]] = {}
    for e in events:
        if e.kind == "delivery" and e.symbol_kind is not None:
            key = (e.tick, e.diagram)
            kinds_seen.setdefault(key, set()).add(e.symbol_kind)
    for key, kinds in kinds_seen.items():
        if {"individual", "general"} <= kinds:
            mixed_input_pairs.add(key)

    completions = [e for e in events if e.kind == "complete"]
    decays = sum(1 for e in completions if e.cause == TransitionCause.DECAY.value)
    coupled = sum(1 for e in completions if e.group is not None)
    complexness = coupled / len(completions) if completions else 0.0
    return ScenarioMetrics(
        completeness=completeness,
        redundancy_count=useless + len(mixed_input_pairs),
        omitted_possibilities=decays,
        complexness=complexness,
    )


def evaluate_scenario(
    traces: Mapping[str, StateTrace],
    events: Iterable[SimEvent],
    final_states: Mapping[str, str],
) -> ScenarioMetrics:
    """Recompute the four metrics from a trace and its event log."""
    return _metrics_from(
        {d: t.entries for d, t in traces.items()}, tuple(events), final_states
    )
