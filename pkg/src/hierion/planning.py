"""Rule-based directive planning: elementary IF-THEN-ELSE rules, goal trees,
partial-diagram acceptance checks, and forecast search.

A rule transfers one subsystem between states in a fixed time at a fixed
resource cost while guarding against one forbidden backstep; plans are
found by uniform-cost search over joint system states.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence, Union

from .errors import UnknownStateId
from .model import Arc, CanonicalDiagram, State, StateTrace
from .scenario import ControlDiagram


@dataclass(frozen=True)
class ElementaryRule:
    """IF subsystem is at `source` THEN control action `action` moves it to
    `target` in `duration` ticks at `resources` cost, ELSE-guarding the
    backstep into `forbidden` (an abort, with the expenditure sunk)."""

    id: str
    subsystem: str
    source: str
    target: str
    forbidden: str
    action: str
    resources: float
    duration: int

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"rule '{self.id}': source equals target")
        if self.forbidden == self.source:
            raise ValueError(f"rule '{self.id}': forbidden state equals source")
        if self.duration < 1:
            raise ValueError(f"rule '{self.id}': duration must be at least 1 tick")
        if self.resources < 0:
            raise ValueError(f"rule '{self.id}': resources must be non-negative")


class RuleFailure(str, Enum):
    WRONG_SOURCE_STATE = "WrongSourceState"
    INSUFFICIENT_RESOURCES = "InsufficientResources"
    FORBIDDEN_BACKSTEP = "ForbiddenBackstep"


@dataclass(frozen=True)
class ControlState:
    """Joint planning state: where every subsystem sits, the shared resource
    pool, the clock, and each subsystem's last-activity tick (which drives
    decay pressure)."""

    diagrams: Mapping[str, ControlDiagram]
    states: Mapping[str, str]
    pool: float
    tick: int = 0
    last_event: Mapping[str, int] = field(default_factory=dict)

    def activity_of(self, diagram_id: str) -> int:
        return self.last_event.get(diagram_id, 0)


def initial_control_state(
    diagrams: Mapping[str, ControlDiagram],
    pool: float,
    states: Mapping[str, str] | None = None,
    tick: int = 0,
) -> ControlState:
    placed = {d: diagrams[d].initial for d in diagrams}
    if states:
        for diagram_id, state_id in states.items():
            if diagram_id not in diagrams:
                raise UnknownStateId(f"unknown diagram '{diagram_id}'")
            if all(s.id != state_id for s in diagrams[diagram_id].states):
                raise UnknownStateId(f"diagram '{diagram_id}' has no state '{state_id}'")
            placed[diagram_id] = state_id
    return ControlState(
        diagrams=diagrams,
        states=placed,
        pool=pool,
        tick=tick,
        last_event={d: tick for d in diagrams},
    )


@dataclass(frozen=True)
class RuleOutcome:
    applied: bool
    failure: RuleFailure | None
    spent: float
    started: int
    completed: int | None


def apply_rule(rule: ElementaryRule, system: ControlState) -> tuple[ControlState, RuleOutcome]:
    """Apply one rule; failures are returned, never raised.

    Success requires the subsystem at the rule's source state and a
    sufficient pool. Expenditure happens up front and is sunk: if the
    subsystem's decay arc would drop it into the forbidden state before the
    transfer completes, the rule aborts with ForbiddenBackstep, the decay
    happens, and nothing is refunded. Decay into any other state is held off
    by the transfer itself.
    """
    if rule.subsystem not in system.diagrams:
        raise UnknownStateId(f"rule '{rule.id}' names unknown subsystem '{rule.subsystem}'")
    diagram = system.diagrams[rule.subsystem]
    current = system.states[rule.subsystem]
    if current != rule.source:
        return system, RuleOutcome(False, RuleFailure.WRONG_SOURCE_STATE, 0.0, system.tick, None)
    if system.pool < rule.resources:
        return system, RuleOutcome(False, RuleFailure.INSUFFICIENT_RESOURCES, 0.0, system.tick, None)

    pool = system.pool - rule.resources
    decay = diagram.decay_from(rule.source)
    if decay is not None and decay.dst == rule.forbidden:
        due = system.activity_of(rule.subsystem) + decay.threshold
        if due < system.tick + rule.duration:
            abort_tick = max(due, system.tick)
            states = dict(system.states)
            states[rule.subsystem] = decay.dst
            last_event = dict(system.last_event)
            last_event[rule.subsystem] = abort_tick
            aborted = replace(
                system, states=states, pool=pool, tick=abort_tick, last_event=last_event
            )
            return aborted, RuleOutcome(
                False, RuleFailure.FORBIDDEN_BACKSTEP, rule.resources, system.tick, None
            )

    completed = system.tick + rule.duration
    states = dict(system.states)
    states[rule.subsystem] = rule.target
    last_event = dict(system.last_event)
    last_event[rule.subsystem] = completed
    applied = replace(
        system, states=states, pool=pool, tick=completed, last_event=last_event
    )
    return applied, RuleOutcome(True, None, rule.resources, system.tick, completed)


# -- goal trees --------------------------------------------------------------------

@dataclass(frozen=True)
class GoalNode:
    """Internal nodes group sub-goals; terminal nodes carry exactly one rule."""

    id: str
    children: tuple["GoalNode", ...] = ()
    rule: ElementaryRule | None = None

    def __post_init__(self) -> None:
        if self.children and self.rule is not None:
            raise ValueError(f"goal '{self.id}': internal nodes carry no rules")
        if not self.children and self.rule is None:
            raise ValueError(f"goal '{self.id}': terminal nodes need a rule")


@dataclass(frozen=True)
class GoalTree:
    id: str
    root: GoalNode


@dataclass(frozen=True)
class GoalRuleRecord:
    node: str
    rule: str
    outcome: RuleOutcome


@dataclass(frozen=True)
class GoalRunReport:
    """Execution report: rules in depth-first order, per-goal verdicts, the
    evolved system state, and the remaining pool."""

    records: tuple[GoalRuleRecord, ...]
    results: Mapping[str, bool]
    final: ControlState
    succeeded: bool
    first_failure: str | None

    @property
    def remaining_pool(self) -> float:
        return self.final.pool


def run_goal_tree(tree: GoalTree, system: ControlState) -> GoalRunReport:
    """Depth-first, left-to-right execution of terminal rules.

    Every subtree runs even after a failure elsewhere (failed goals are
    marked, siblings still execute, maximizing diagnostic information); an
    internal goal succeeds iff all its children succeeded.
    """
    records: list[GoalRuleRecord] = []
    results: dict[str, bool] = {}
    first_failure: str | None = None
    state = system

    def execute(node: GoalNode) -> bool:
        nonlocal state, first_failure
        if node.rule is not None:
            state, outcome = apply_rule(node.rule, state)
            records.append(GoalRuleRecord(node.id, node.rule.id, outcome))
            results[node.id] = outcome.applied
            if not outcome.applied and first_failure is None:
                first_failure = node.id
            return outcome.applied
        ok = True
        for child in node.children:
            ok = execute(child) and ok
        results[node.id] = ok
        return ok

    succeeded = execute(tree.root)
    return GoalRunReport(
        records=tuple(records),
        results=results,
        final=state,
        succeeded=succeeded,
        first_failure=first_failure,
    )


# -- partial diagrams ---------------------------------------------------------------

@dataclass(frozen=True)
class SupportState:
    diagram: str
    state: str
    deadline: int


@dataclass(frozen=True)
class PartialDiagram:
    """Ordered support states with time/resource restrictions; the scenario
    acceptance criterion. The smallest useful instance is the pair
    {initial state, desired final state}."""

    id: str
    support_states: tuple[SupportState, ...]
    max_ticks: int | None = None
    max_resources: float | None = None

    def __post_init__(self) -> None:
        deadlines = [s.deadline for s in self.support_states]
        if any(b < a for a, b in zip(deadlines, deadlines[1:])):
            raise ValueError(f"partial diagram '{self.id}': deadlines must not decrease")
        if self.max_ticks is not None and self.max_ticks < 0:
            raise ValueError(f"partial diagram '{self.id}': max_ticks negative")
        if self.max_resources is not None and self.max_resources < 0:
            raise ValueError(f"partial diagram '{self.id}': max_resources negative")


@dataclass(frozen=True)
class PartialCheck:
    confirmed: bool
    first_miss: SupportState | None = None
    actual_state: str | None = None
    budget_violation: str | None = None

    @property
    def verdict(self) -> str:
        return "CONFIRMED" if self.confirmed else "REFUTED"


def check_partial_diagram(
    traces: Mapping[str, StateTrace],
    partial: PartialDiagram,
    resources_spent: float = 0.0,
    horizon: int | None = None,
) -> PartialCheck:
    """Confirm iff every support state was occupied at or before its deadline,
    in list order, within the time and resource budget.

    Refutation carries the first unmet support state and the subsystem's
    actual state at that deadline; budget breaches refute with a flag.
    """
    for support in partial.support_states:
        if support.diagram not in traces:
            raise UnknownStateId(f"no trace for diagram '{support.diagram}'")

    previous_time = 0
    for support in partial.support_states:
        trace = traces[support.diagram]
        met: int | None = None
        for t in range(previous_time, support.deadline + 1):
            if trace.state_at(t) == support.state:
                met = t
                break
        if met is None:
            return PartialCheck(
                confirmed=False,
                first_miss=support,
                actual_state=trace.state_at(support.deadline),
            )
        previous_time = met

    if partial.max_resources is not None and resources_spent > partial.max_resources:
        return PartialCheck(
            confirmed=False,
            budget_violation=f"resources {resources_spent} exceed {partial.max_resources}",
        )
    if partial.max_ticks is not None:
        elapsed = horizon
        if elapsed is None:
            elapsed = max((t.entries[-1].tick for t in traces.values()), default=0)
        if elapsed > partial.max_ticks:
            return PartialCheck(
                confirmed=False,
                budget_violation=f"horizon {elapsed} exceeds {partial.max_ticks}",
            )
    return PartialCheck(confirmed=True)


# -- forecast -----------------------------------------------------------------------

@dataclass(frozen=True)
class PlanStep:
    rule: ElementaryRule
    started: int
    completed: int
    cumulative_resources: float


@dataclass(frozen=True)
class Plan:
    """Least-cost rule sequence meeting all support states in order, plus the
    state-development diagram it induces (support chain; deltas are realized
    durations, floored at one tick)."""

    steps: tuple[PlanStep, ...]
    met: tuple[tuple[SupportState, int], ...]
    total_ticks: int
    total_resources: float
    diagram: CanonicalDiagram


@dataclass(frozen=True)
class Infeasible:
    """No plan exists; carries the longest satisfiable support prefix and a
    sample of frontier configurations that realize it."""

    satisfied_prefix: tuple[SupportState, ...]
    frontier: tuple[tuple[tuple[tuple[str, str], ...], int, float], ...]


ForecastResult = Union[Plan, Infeasible]


def forecast_result_to_json(result: ForecastResult) -> dict:
    """Wire form of a forecast outcome (shared by the CLI and the API)."""
    if isinstance(result, Infeasible):
        return {
            "feasible": False,
            "satisfied_prefix": [
                {"diagram": s.diagram, "state": s.state, "deadline": s.deadline}
                for s in result.satisfied_prefix
            ],
            "frontier": [
                {"states": dict(states), "elapsed": elapsed, "resources": spent}
                for states, elapsed, spent in result.frontier
            ],
        }
    return {
        "feasible": True,
        "total_ticks": result.total_ticks,
        "total_resources": result.total_resources,
        "steps": [
            {
                "rule": step.rule.id,
                "subsystem": step.rule.subsystem,
                "action": step.rule.action,
                "from": step.rule.source,
                "to": step.rule.target,
                "started": step.started,
                "completed": step.completed,
                "cumulative_resources": step.cumulative_resources,
            }
            for step in result.steps
        ],
        "support_chain": [
            {"diagram": s.diagram, "state": s.state, "met_at": met}
            for s, met in result.met
        ],
        "predicted_diagram": {
            "states": [s.id for s in result.diagram.states],
            "dev_arcs": [
                {"src": a.src, "dst": a.dst, "delta": a.delta}
                for a in result.diagram.dev_arcs
            ],
        },
    }


def _advance_supports(
    supports: Sequence[SupportState],
    index: int,
    met_times: tuple[int, ...],
    state: ControlState,
) -> tuple[int, tuple[int, ...]]:
    """Greedily mark support states satisfied by the current configuration.

    A support is met at max(previous met time, entry tick of the current
    state), provided that does not exceed its deadline; occupation persists
    until some rule moves the subsystem.
    """
    while index < len(supports):
        support = supports[index]
        if state.states.get(support.diagram) != support.state:
            break
        previous = met_times[-1] if met_times else 0
        met_at = max(previous, state.activity_of(support.diagram))
        if met_at > support.deadline:
            break
        met_times = met_times + (met_at,)
        index += 1
    return index, met_times


def forecast(
    initial: ControlState,
    rules: Sequence[ElementaryRule],
    partial: PartialDiagram,
    resource_priority: bool = False,
) -> ForecastResult:
    """Uniform-cost search for a rule sequence realizing the partial diagram.

    Cost is lexicographic (elapsed ticks, spent resources); pass
    resource_priority=True to swap the order. Expansion is by applicable
    rules only, in declaration order; ties break deterministically by
    insertion, so the result is reproducible.
    """
    supports = partial.support_states
    for support in supports:
        if support.diagram not in initial.diagrams:
            raise UnknownStateId(f"unknown diagram '{support.diagram}' in partial diagram")
        if all(s.id != support.state for s in initial.diagrams[support.diagram].states):
            raise UnknownStateId(
                f"diagram '{support.diagram}' has no state '{support.state}'"
            )

    # no rule completing past the last deadline can help meet a support
    deadline_cap = max((s.deadline for s in supports), default=0)
    tick_cap = deadline_cap
    if partial.max_ticks is not None:
        tick_cap = min(tick_cap, partial.max_ticks)

    start_index, start_met = _advance_supports(supports, 0, (), initial)

    def cost_key(elapsed: int, spent: float) -> tuple:
        return (spent, elapsed) if resource_priority else (elapsed, spent)

    counter = 0
    heap: list = []
    heapq.heappush(
        heap, (cost_key(0, 0.0), counter, initial, start_index, start_met, ())
    )
    best_seen: dict = {}
    best_prefix = start_index
    frontier: list[tuple[tuple[tuple[str, str], ...], int, float]] = []

    def snapshot(state: ControlState) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(state.states.items()))

    while heap:
        key, _, state, index, met_times, steps = heapq.heappop(heap)
        elapsed = state.tick - initial.tick
        spent = initial.pool - state.pool
        if index > best_prefix:
            best_prefix = index
            frontier = []
        if index == best_prefix and len(frontier) < 5:
            entry = (snapshot(state), elapsed, spent)
            if entry not in frontier:
                frontier.append(entry)
        if index == len(supports):
            return _build_plan(steps, list(zip(supports, met_times)), elapsed, spent)

        dedupe = (snapshot(state), tuple(sorted(state.last_event.items())), index)
        if dedupe in best_seen and best_seen[dedupe] <= key:
            continue
        best_seen[dedupe] = key

        for rule in rules:
            next_state, outcome = apply_rule(rule, state)
            if not outcome.applied:
                continue
            next_elapsed = next_state.tick - initial.tick
            next_spent = initial.pool - next_state.pool
            if supports and next_elapsed > tick_cap:
                continue
            if partial.max_ticks is not None and next_elapsed > partial.max_ticks:
                continue
            if partial.max_resources is not None and next_spent > partial.max_resources:
                continue
            next_index, next_met = _advance_supports(
                supports, index, met_times, next_state
            )
            counter += 1
            heapq.heappush(
                heap,
                (
                    cost_key(next_elapsed, next_spent),
                    counter,
                    next_state,
                    next_index,
                    next_met,
                    steps + ((rule, outcome),),
                ),
            )
    return Infeasible(
        satisfied_prefix=tuple(supports[:best_prefix]), frontier=tuple(frontier)
    )


def _build_plan(
    steps: tuple[tuple[ElementaryRule, RuleOutcome], ...],
    met: list[tuple[SupportState, int]],
    total_ticks: int,
    total_resources: float,
) -> Plan:
    plan_steps = []
    cumulative = 0.0
    for rule, outcome in steps:
        cumulative += outcome.spent
        plan_steps.append(
            PlanStep(
                rule=rule,
                started=outcome.started,
                completed=outcome.completed if outcome.completed is not None else outcome.started,
                cumulative_resources=cumulative,
            )
        )

    names: list[str] = []
    for support, _ in met:
        base = f"{support.diagram}.{support.state}"
        name = base
        suffix = 2
        while name in names:
            name = f"{base}#{suffix}"
            suffix += 1
        names.append(name)
    states = tuple(State(id=name, rank=i) for i, name in enumerate(names))
    arcs = tuple(
        Arc(names[i], names[i + 1], max(1, met[i + 1][1] - met[i][1]))
        for i in range(len(met) - 1)
    )
    diagram = CanonicalDiagram(
        id="forecast",
        states=states,
        dev_arcs=arcs,
        back_arcs=(),
        initial=names[0] if names else "",
        final=names[-1] if names else "",
    )
    return Plan(
        steps=tuple(plan_steps),
        met=tuple(met),
        total_ticks=total_ticks,
        total_resources=total_resources,
        diagram=diagram,
    )
