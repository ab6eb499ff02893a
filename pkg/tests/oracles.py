"""Independent oracles shared by module tests and the acceptance suite.

Everything here deliberately avoids the engine's own algorithms: products
are built by explicit enumeration, consistency by exhaustive path
enumeration, plans by brute-force sequence search with its own rule
applier and a timeline-based support check.
"""

from __future__ import annotations

from itertools import product as cartesian

from hierion.compose import ParallelFragment
from hierion.model import Arc, CanonicalDiagram, State
from hierion.planning import ControlState, ElementaryRule, PartialDiagram


def synchronous_product(d1: CanonicalDiagram, d2: CanonicalDiagram) -> CanonicalDiagram:
    """Explicit synchronous product: both children step at once.

    States are all pairs, ranked by (rank sum, first rank); an arc exists
    where both children have a development arc, with delta = max of the two.
    """
    ranks1 = {s.id: s.rank for s in d1.states}
    ranks2 = {s.id: s.rank for s in d2.states}
    pairs = sorted(
        cartesian(d1.state_ids(), d2.state_ids()),
        key=lambda p: (ranks1[p[0]] + ranks2[p[1]], ranks1[p[0]], p),
    )
    name = {pair: f"{pair[0]}|{pair[1]}" for pair in pairs}
    states = tuple(State(id=name[p], rank=i) for i, p in enumerate(pairs))
    arcs = []
    for a1 in d1.dev_arcs:
        for a2 in d2.dev_arcs:
            arcs.append(
                Arc(name[(a1.src, a2.src)], name[(a1.dst, a2.dst)], max(a1.delta, a2.delta))
            )
    return CanonicalDiagram(
        id=f"product({d1.id},{d2.id})",
        states=states,
        dev_arcs=tuple(arcs),
        back_arcs=(),
        initial=name[(d1.initial, d2.initial)],
        final=name[(d1.final, d2.final)],
    )


def enumerate_dev_paths(diagram: CanonicalDiagram) -> list[list[tuple[str, int]]]:
    """All simple development paths from the initial state, as lists of
    (state, minimal cumulative delta along this path)."""
    paths: list[list[tuple[str, int]]] = []

    def extend(path: list[tuple[str, int]]) -> None:
        paths.append(list(path))
        current, elapsed = path[-1]
        for arc in diagram.dev_arcs:
            if arc.src == current and all(s != arc.dst for s, _ in path):
                path.append((arc.dst, elapsed + arc.delta))
                extend(path)
                path.pop()

    extend([(diagram.initial, 0)])
    return paths


def consistency_oracle(
    fragment: CanonicalDiagram | ParallelFragment,
    requirement: list[tuple[str, int]],
) -> bool:
    """Exhaustive decision of timed attainability in prescribed order.

    Tries every combination of simple development paths (one per child);
    over a fixed path combination, earliest-feasible time assignment is
    exact because transitions may be delayed arbitrarily.
    """
    children = (
        list(fragment.children) if isinstance(fragment, ParallelFragment) else [fragment]
    )
    owner: dict[str, int] = {}
    for index, child in enumerate(children):
        for state_id in child.state_ids():
            owner.setdefault(state_id, index)

    per_child_paths = [enumerate_dev_paths(child) for child in children]
    for combo in cartesian(*per_child_paths):
        cursor = [0] * len(children)  # next usable position on each path
        base_time = [0] * len(children)  # entry time of that position
        previous_time = 0
        feasible = True
        for state_id, deadline in requirement:
            child_index = owner.get(state_id)
            if child_index is None:
                feasible = False
                break
            path = combo[child_index]
            hit = next(
                (
                    pos
                    for pos in range(cursor[child_index], len(path))
                    if path[pos][0] == state_id
                ),
                None,
            )
            if hit is None:
                feasible = False
                break
            step_cost = path[hit][1] - path[cursor[child_index]][1]
            arrival = max(base_time[child_index] + step_cost, previous_time)
            if arrival > deadline:
                feasible = False
                break
            cursor[child_index] = hit
            base_time[child_index] = arrival
            previous_time = arrival
        if feasible:
            return True
    return False


# -- forecast oracle -------------------------------------------------------------

def _greedy_prefix(timelines, supports) -> int:
    """Supports satisfiable in order against per-diagram (entry, state)
    timelines; a state stays occupied until the next entry."""
    previous = 0
    met_count = 0
    for support in supports:
        timeline = timelines[support.diagram]
        met = None
        for position, (entry, state) in enumerate(timeline):
            if state != support.state:
                continue
            leave = (
                timeline[position + 1][0] if position + 1 < len(timeline) else None
            )
            t = max(previous, entry)
            if leave is not None and t >= leave:
                continue
            if t <= support.deadline:
                met = t
                break
        if met is None:
            return met_count
        previous = met
        met_count += 1
    return met_count


def forecast_oracle(
    initial: ControlState,
    rules: list[ElementaryRule],
    partial: PartialDiagram,
) -> tuple[tuple[int, float] | None, int]:
    """Brute-force search over successful rule applications.

    Returns (best (elapsed ticks, spent resources) or None, longest
    satisfiable support prefix). Rule application is re-implemented here,
    including the forbidden-backstep abort, to stay independent.
    """
    supports = list(partial.support_states)
    cap = max((s.deadline for s in supports), default=0)
    if partial.max_ticks is not None:
        cap = min(cap, partial.max_ticks)
    budget = partial.max_resources

    best: list[tuple[int, float] | None] = [None]
    best_prefix = [0]

    def try_apply(rule, states, pool, tick, entered):
        if states[rule.subsystem] != rule.source:
            return None
        if pool < rule.resources:
            return None
        diagram = initial.diagrams[rule.subsystem]
        decay = diagram.decay_from(rule.source)
        if (
            decay is not None
            and decay.dst == rule.forbidden
            and entered[rule.subsystem] + decay.threshold < tick + rule.duration
        ):
            return None  # would abort: not a usable plan step
        done = tick + rule.duration
        new_states = dict(states)
        new_states[rule.subsystem] = rule.target
        new_entered = dict(entered)
        new_entered[rule.subsystem] = done
        return new_states, pool - rule.resources, done, new_entered

    def recurse(states, pool, tick, entered, timelines, spent):
        count = _greedy_prefix(timelines, supports)
        best_prefix[0] = max(best_prefix[0], count)
        if count == len(supports):
            cost = (tick - initial.tick, spent)
            if best[0] is None or cost < best[0]:
                best[0] = cost
            return
        for rule in rules:
            applied = try_apply(rule, states, pool, tick, entered)
            if applied is None:
                continue
            new_states, new_pool, done, new_entered = applied
            if done - initial.tick > cap:
                continue
            new_spent = spent + rule.resources
            if budget is not None and new_spent > budget:
                continue
            new_timelines = {
                d: timeline + ((done, new_states[d]),) if d == rule.subsystem else timeline
                for d, timeline in timelines.items()
            }
            recurse(new_states, new_pool, done, new_entered, new_timelines, new_spent)

    timelines = {
        d: ((initial.tick, initial.states[d]),) for d in initial.diagrams
    }
    recurse(
        dict(initial.states),
        initial.pool,
        initial.tick,
        {d: initial.activity_of(d) for d in initial.diagrams},
        timelines,
        0.0,
    )
    return best[0], best_prefix[0]
