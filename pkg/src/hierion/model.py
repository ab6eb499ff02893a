"""Core domain types: hierarchy, states, diagrams, distributions, traces.

All types here are immutable values; every "mutation" constructs a new value,
so instances are safe to share across threads. Model time is integer ticks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import ObjectUniverseMismatch

if TYPE_CHECKING:
    from .trend import TrendClass


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Closed interval of integer ticks, start <= end."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError(f"interval end {self.end} precedes start {self.start}")

    def length(self) -> int:
        return self.end - self.start

    def contains(self, tick: int) -> bool:
        return self.start <= tick <= self.end


@dataclass(frozen=True)
class ParameterNode:
    """One node of the parameter hierarchy."""

    id: str
    level: int
    polymorphic: bool = False
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class ParameterHierarchy:
    """Tree of parameter nodes; the root sits at level 0.

    The same structure doubles as the subsystem hierarchy that scenarios are
    mapped onto: a node can both name a parameter block and carry a diagram.
    """

    nodes: Mapping[str, ParameterNode]
    root: str

    def __post_init__(self) -> None:
        problems = validate_hierarchy(self.nodes, self.root)
        if problems:
            raise ValueError("; ".join(problems))

    def parent_of(self, node_id: str) -> str | None:
        for node in self.nodes.values():
            if node_id in node.children:
                return node.id
        return None

    def children_of(self, node_id: str) -> tuple[str, ...]:
        return self.nodes[node_id].children


def hierarchy_from_nodes(nodes: Iterable[ParameterNode]) -> ParameterHierarchy:
    """Build a hierarchy, inferring the root as the unique level-0 node."""
    by_id = {n.id: n for n in nodes}
    roots = [n.id for n in by_id.values() if n.level == 0]
    if len(roots) != 1:
        raise ValueError(f"hierarchy needs exactly one level-0 root, got {roots}")
    return ParameterHierarchy(nodes=by_id, root=roots[0])


def validate_hierarchy(nodes: Mapping[str, ParameterNode], root: str) -> list[str]:
    problems: list[str] = []
    if root not in nodes:
        return [f"root '{root}' not among nodes"]
    if nodes[root].level != 0:
        problems.append(f"root '{root}' has level {nodes[root].level}, expected 0")
    seen_as_child: set[str] = set()
    for node in nodes.values():
        for child in node.children:
            if child not in nodes:
                problems.append(f"node '{node.id}' lists unknown child '{child}'")
                continue
            if child in seen_as_child:
                problems.append(f"node '{child}' has two parents")
            seen_as_child.add(child)
            if nodes[child].level != node.level + 1:
                problems.append(
                    f"child '{child}' of '{node.id}' has level {nodes[child].level}, "
                    f"expected {node.level + 1}"
                )
    # reachability doubles as the acyclicity check for a parent-unique tree
    reachable = {root}
    frontier = [root]
    while frontier:
        for child in nodes[frontier.pop()].children:
            if child in nodes and child not in reachable:
                reachable.add(child)
                frontier.append(child)
    for orphan in sorted(set(nodes) - reachable):
        problems.append(f"node '{orphan}' unreachable from root")
    return problems


@dataclass(frozen=True)
class TrackedObject:
    """A monitored object: per-parameter time series of real values."""

    id: str
    level: int
    series: Mapping[str, tuple[tuple[int, float], ...]]

    def __post_init__(self) -> None:
        for parameter, points in self.series.items():
            ticks = [t for t, _ in points]
            if any(b <= a for a, b in zip(ticks, ticks[1:])):
                raise ValueError(
                    f"object '{self.id}' parameter '{parameter}': "
                    "ticks must be strictly increasing"
                )


@dataclass(frozen=True)
class State:
    """A qualitative state. `rank` induces the development order within one
    diagram; cross-diagram rank comparison is undefined.

    The signature records which (parameter, trend) bundle the state stands
    for; it is descriptive and not consulted by any algorithm.
    """

    id: str
    rank: int
    level: int = 0
    signature: frozenset[tuple[str, "TrendClass"]] = frozenset()


@dataclass(frozen=True)
class Arc:
    """Directed transition taking `delta` ticks (a positive count)."""

    src: str
    dst: str
    delta: int = 1

    def key(self) -> tuple[str, str]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Distribution:
    """Assignment of object ids to states. A well-formed distribution is
    disjoint (each object occupies exactly one state); violations are kept
    representable so validators can report them as data.
    """

    assignment: Mapping[str, frozenset[str]]

    def objects(self) -> frozenset[str]:
        out: set[str] = set()
        for members in self.assignment.values():
            out.update(members)
        return frozenset(out)

    def counts(self) -> dict[str, int]:
        return {state: len(members) for state, members in self.assignment.items()}

    def count(self, state: str) -> int:
        return len(self.assignment.get(state, frozenset()))

    def state_of(self, object_id: str) -> str | None:
        for state, members in self.assignment.items():
            if object_id in members:
                return state
        return None

    def overlapping_objects(self) -> dict[str, list[str]]:
        """Objects assigned to more than one state, with their states."""
        placements: dict[str, list[str]] = {}
        for state, members in self.assignment.items():
            for obj in members:
                placements.setdefault(obj, []).append(state)
        return {o: sorted(s) for o, s in placements.items() if len(s) > 1}

    def is_disjoint(self) -> bool:
        return not self.overlapping_objects()


def distribution(mapping: Mapping[str, Iterable[str]]) -> Distribution:
    """Convenience constructor accepting any iterables of object ids."""
    return Distribution({s: frozenset(m) for s, m in mapping.items()})


@dataclass(frozen=True)
class CanonicalDiagram:
    """Hypothesized state-development diagram with a target-distribution
    schedule: ordered states, development arcs (rank-increasing) and critical
    backstep arcs (rank-decreasing), distinguished initial/final states.
    """

    id: str
    states: tuple[State, ...]
    dev_arcs: tuple[Arc, ...]
    back_arcs: tuple[Arc, ...]
    initial: str
    final: str
    target_schedule: tuple[tuple[int, Distribution], ...] = ()

    def state_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.states)

    def rank_of(self, state_id: str) -> int:
        for s in self.states:
            if s.id == state_id:
                return s.rank
        raise KeyError(state_id)

    def arc_keys(self) -> frozenset[tuple[str, str]]:
        return frozenset(a.key() for a in self.dev_arcs) | frozenset(
            a.key() for a in self.back_arcs
        )


def chain_diagram(
    diagram_id: str,
    state_ids: Iterable[str],
    delta: int = 1,
    back_arcs: Iterable[Arc] = (),
) -> CanonicalDiagram:
    """Linear development chain over the given states, in order."""
    ids = list(state_ids)
    states = tuple(State(id=s, rank=i) for i, s in enumerate(ids))
    arcs = tuple(Arc(a, b, delta) for a, b in zip(ids, ids[1:]))
    return CanonicalDiagram(
        id=diagram_id,
        states=states,
        dev_arcs=arcs,
        back_arcs=tuple(back_arcs),
        initial=ids[0],
        final=ids[-1],
    )


def validate_diagram(diagram: CanonicalDiagram) -> list[str]:
    """Check every structural invariant; returns one line per violation.

    Violations are data, not failures: an empty report means valid.
    """
    problems: list[str] = []
    ranks: dict[str, int] = {}
    for state in diagram.states:
        if state.id in ranks:
            problems.append(f"duplicate state id: {state.id}")
        ranks[state.id] = state.rank

    def known(state_id: str, site: str) -> bool:
        if state_id not in ranks:
            problems.append(f"{site} references unknown state '{state_id}'")
            return False
        return True

    for arc in diagram.dev_arcs:
        if not (known(arc.src, "devArc") and known(arc.dst, "devArc")):
            continue
        if arc.delta < 1:
            problems.append(f"devArc ({arc.src},{arc.dst}) has non-positive delta {arc.delta}")
        if ranks[arc.src] >= ranks[arc.dst]:
            problems.append(f"devArc violates rank order: ({arc.src},{arc.dst})")
    for arc in diagram.back_arcs:
        if not (known(arc.src, "backArc") and known(arc.dst, "backArc")):
            continue
        if arc.delta < 1:
            problems.append(f"backArc ({arc.src},{arc.dst}) has non-positive delta {arc.delta}")
        if ranks[arc.dst] >= ranks[arc.src]:
            problems.append(f"backArc violates rank order: ({arc.src},{arc.dst})")

    dev_keys = {a.key() for a in diagram.dev_arcs}
    back_keys = {a.key() for a in diagram.back_arcs}
    for src, dst in sorted(dev_keys & back_keys):
        problems.append(f"arc ({src},{dst}) is both development and backstep")

    if known(diagram.initial, "initial state") and ranks:
        if ranks[diagram.initial] != min(ranks.values()):
            problems.append(f"initial state '{diagram.initial}' does not have minimal rank")
    if known(diagram.final, "final state") and ranks:
        if ranks[diagram.final] != max(ranks.values()):
            problems.append(f"final state '{diagram.final}' does not have maximal rank")

    previous_tick: int | None = None
    for index, (tick, dist) in enumerate(diagram.target_schedule):
        if index == 0 and tick != 0:
            problems.append(f"target schedule must start at tick 0, starts at {tick}")
        if previous_tick is not None and tick <= previous_tick:
            problems.append(f"target schedule ticks not increasing at tick {tick}")
        previous_tick = tick
        for state_id in dist.assignment:
            known(state_id, f"target schedule tick {tick}")
        if not dist.is_disjoint():
            problems.append(f"distribution not disjoint at schedule tick {tick}")
    return problems


@dataclass(frozen=True)
class Move:
    """One object changing state between two distributions."""

    object_id: str
    src: str
    dst: str


def distribution_delta(prev: Distribution, next: Distribution) -> frozenset[Move]:
    """Exactly the objects whose state changed between two snapshots.

    Both distributions must cover the same object universe; an object present
    in only one raises ObjectUniverseMismatch.
    """
    prev_objects = prev.objects()
    next_objects = next.objects()
    if prev_objects != next_objects:
        missing = sorted(prev_objects ^ next_objects)
        raise ObjectUniverseMismatch(
            f"objects present in only one distribution: {missing}"
        )
    moves = []
    for obj in prev_objects:
        src = prev.state_of(obj)
        dst = next.state_of(obj)
        if src != dst:
            moves.append(Move(obj, src, dst))  # type: ignore[arg-type]
    return frozenset(moves)


def apply_moves(prev: Distribution, moves: Iterable[Move]) -> Distribution:
    """Replay moves onto a distribution; inverse check for distribution_delta."""
    assignment = {s: set(m) for s, m in prev.assignment.items()}
    for move in moves:
        assignment.setdefault(move.src, set()).discard(move.object_id)
        assignment.setdefault(move.dst, set()).add(move.object_id)
    return Distribution({s: frozenset(m) for s, m in assignment.items()})


@dataclass(frozen=True)
class ArcCounters:
    """Per-arc move counters and per-state occupancy over time.

    `per_arc` accumulates how many objects traversed each (src, dst) arc;
    `occupancy` records N_i(t): for each state, (tick, count) samples.
    """

    per_arc: Mapping[tuple[str, str], int] = field(default_factory=dict)
    occupancy: Mapping[str, tuple[tuple[int, int], ...]] = field(default_factory=dict)

    @staticmethod
    def empty() -> "ArcCounters":
        return ArcCounters(per_arc={}, occupancy={})

    def arc_count(self, src: str, dst: str) -> int:
        return self.per_arc.get((src, dst), 0)

    def with_increment(self, src: str, dst: str) -> "ArcCounters":
        per_arc = dict(self.per_arc)
        per_arc[(src, dst)] = per_arc.get((src, dst), 0) + 1
        return replace(self, per_arc=per_arc)

    def with_occupancy(
        self, state_ids: Iterable[str], dist: Distribution, tick: int
    ) -> "ArcCounters":
        occupancy = {s: tuple(samples) for s, samples in self.occupancy.items()}
        for state_id in state_ids:
            samples = occupancy.get(state_id, ())
            occupancy[state_id] = samples + ((tick, dist.count(state_id)),)
        return replace(self, occupancy=occupancy)

    def occupancy_at(self, state_id: str, tick: int) -> int | None:
        for sample_tick, count in self.occupancy.get(state_id, ()):
            if sample_tick == tick:
                return count
        return None


class TransitionCause(str, Enum):
    """Why a trace entry happened; INITIAL marks the starting placement."""

    INITIAL = "initial"
    SYMBOL = "symbol"
    DECAY = "decay"
    RULE = "rule"
    PROPAGATION = "propagation"


@dataclass(frozen=True)
class StateTraceEntry:
    tick: int
    state: str
    cause: TransitionCause


@dataclass(frozen=True)
class StateTrace:
    """Timeline of one subsystem's states; the first entry is its initial
    state and ticks are non-decreasing."""

    diagram_id: str
    entries: tuple[StateTraceEntry, ...]

    def __post_init__(self) -> None:
        ticks = [e.tick for e in self.entries]
        if any(b < a for a, b in zip(ticks, ticks[1:])):
            raise ValueError(f"trace of '{self.diagram_id}': ticks must be non-decreasing")

    def state_at(self, tick: int) -> str:
        """State occupied at `tick` (step function over entries)."""
        current = self.entries[0].state
        for entry in self.entries:
            if entry.tick > tick:
                break
            current = entry.state
        return current

    def final_state(self) -> str:
        return self.entries[-1].state


@dataclass(frozen=True)
class MetricTrace:
    """Named real metrics sampled per tick."""

    entries: tuple[tuple[int, Mapping[str, float]], ...] = ()
