"""Structural composition of state diagrams: sequential and parallel
fragments, generalization over Cartesian products of child states, and the
timed-reachability consistency check.

Parent arcs of a generalization are caller-declared; the algebra never
invents coupling (cross-level after-effects live in the scenario machinery).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Mapping, Sequence

from .errors import (
    IntervalMismatch,
    IntervalOrderViolation,
    InvalidChild,
    OrderInconsistent,
    OverlappingBlocks,
    UncoveredRequiredTuple,
    UnknownStateId,
)
from .model import Arc, CanonicalDiagram, State, TimeInterval, validate_diagram


@dataclass(frozen=True)
class StateBlock:
    """A block of child-state tuples, one coordinate per child diagram."""

    id: str
    members: frozenset[tuple[str, ...]]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError(f"block '{self.id}' is empty")


class CompositionKind(str, Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    GENERALIZATION = "generalization"


@dataclass(frozen=True)
class CompositionSpec:
    """Declarative composition request over diagrams known by id."""

    kind: CompositionKind
    children: tuple[str, ...]
    intervals: tuple[TimeInterval, ...]
    blocks: tuple[StateBlock, ...] = ()
    block_arcs: tuple[tuple[str, str, int], ...] = ()


@dataclass(frozen=True)
class ParallelFragment:
    """Co-resident diagrams on one interval; the fragment's state at any tick
    is the tuple of child states."""

    children: tuple[CanonicalDiagram, ...]
    interval: TimeInterval

    def joint_state_count(self) -> int:
        count = 1
        for child in self.children:
            count *= len(child.states)
        return count


def compose_sequential(
    children: Sequence[tuple[CanonicalDiagram, TimeInterval]]
) -> CanonicalDiagram:
    """Chain diagrams over strictly increasing intervals.

    Ranks are offset so every state of child i precedes every state of child
    i+1, and a bridging development arc joins child i's final state to child
    i+1's initial state with delta equal to the inter-interval gap. Colliding
    state ids across children are qualified as '<diagram id>.<state id>'.
    """
    if not children:
        raise InvalidChild("nothing to compose")
    for child, _ in children:
        report = validate_diagram(child)
        if report:
            raise InvalidChild(f"child '{child.id}' invalid: {report}")
    for (_, a), (_, b) in zip(children, children[1:]):
        if a.end >= b.start:
            raise IntervalOrderViolation(
                f"intervals must be strictly increasing: "
                f"[{a.start},{a.end}] then [{b.start},{b.end}]"
            )
    if len(children) == 1:
        return children[0][0]

    id_counts: dict[str, int] = {}
    for child, _ in children:
        for state_id in child.state_ids():
            id_counts[state_id] = id_counts.get(state_id, 0) + 1

    def qualified(child: CanonicalDiagram, state_id: str) -> str:
        return f"{child.id}.{state_id}" if id_counts[state_id] > 1 else state_id

    states: list[State] = []
    dev_arcs: list[Arc] = []
    back_arcs: list[Arc] = []
    offset = 0
    for index, (child, interval) in enumerate(children):
        min_rank = min(s.rank for s in child.states)
        for s in child.states:
            states.append(
                State(
                    id=qualified(child, s.id),
                    rank=offset + (s.rank - min_rank),
                    level=s.level,
                    signature=s.signature,
                )
            )
        dev_arcs.extend(
            Arc(qualified(child, a.src), qualified(child, a.dst), a.delta)
            for a in child.dev_arcs
        )
        back_arcs.extend(
            Arc(qualified(child, a.src), qualified(child, a.dst), a.delta)
            for a in child.back_arcs
        )
        offset += max(s.rank for s in child.states) - min_rank + 1
        if index + 1 < len(children):
            next_child, next_interval = children[index + 1]
            dev_arcs.append(
                Arc(
                    qualified(child, child.final),
                    qualified(next_child, next_child.initial),
                    next_interval.start - interval.end,
                )
            )

    first_child, _ = children[0]
    last_child, _ = children[-1]
    return CanonicalDiagram(
        id="+".join(child.id for child, _ in children),
        states=tuple(states),
        dev_arcs=tuple(dev_arcs),
        back_arcs=tuple(back_arcs),
        initial=qualified(first_child, first_child.initial),
        final=qualified(last_child, last_child.final),
    )


def compose_parallel(
    children: Sequence[tuple[CanonicalDiagram, TimeInterval]]
) -> ParallelFragment:
    """Bundle diagrams defined on one identical tick interval."""
    if not children:
        raise InvalidChild("nothing to compose")
    base = children[0][1]
    for child, interval in children:
        if interval != base:
            raise IntervalMismatch(
                f"child '{child.id}' runs [{interval.start},{interval.end}], "
                f"expected [{base.start},{base.end}]"
            )
    return ParallelFragment(children=tuple(c for c, _ in children), interval=base)


@dataclass(frozen=True)
class Generalization:
    """A parent diagram over blocks of child-state tuples, plus the induced
    membership function."""

    parent: CanonicalDiagram
    children: tuple[str, ...]
    blocks: tuple[StateBlock, ...]
    _index: Mapping[tuple[str, ...], str] = field(default_factory=dict, repr=False)

    def membership(self, combo: tuple[str, ...]) -> str | None:
        """Parent block holding this tuple of child states, None if uncovered."""
        return self._index.get(combo)


def generalize(
    children: Sequence[CanonicalDiagram],
    blocks: Sequence[StateBlock],
    arcs: Sequence[tuple[str, str, int]] = (),
    require_total: bool = False,
) -> Generalization:
    """Build the parent diagram of a two-level hierarchy.

    Blocks are ranked by their list order, which must realize the child
    orders: a lower block may not contain a tuple that coordinate-wise
    strictly dominates a tuple of a higher block. Parent arcs are declared by
    the caller between block ids; rank-increasing ones become development
    arcs, rank-decreasing ones backstep arcs.
    """
    child_states = [set(c.state_ids()) for c in children]
    ranks = [
        {s.id: s.rank for s in child.states} for child in children
    ]
    for block in blocks:
        for combo in block.members:
            if len(combo) != len(children):
                raise UnknownStateId(
                    f"block '{block.id}' tuple {combo} has {len(combo)} coordinates, "
                    f"expected {len(children)}"
                )
            for coordinate, state_id in enumerate(combo):
                if state_id not in child_states[coordinate]:
                    raise UnknownStateId(
                        f"block '{block.id}' references unknown state '{state_id}' "
                        f"of child '{children[coordinate].id}'"
                    )

    seen: dict[tuple[str, ...], str] = {}
    for block in blocks:
        for combo in block.members:
            if combo in seen:
                raise OverlappingBlocks(
                    f"tuple {combo} belongs to blocks '{seen[combo]}' and '{block.id}'"
                )
            seen[combo] = block.id

    if require_total:
        full = set(product(*(sorted(s) for s in child_states)))
        uncovered = full - set(seen)
        if uncovered:
            raise UncoveredRequiredTuple(f"{len(uncovered)} tuples uncovered, e.g. {sorted(uncovered)[0]}")

    def dominates(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
        pairs = [(ranks[i][a[i]], ranks[i][b[i]]) for i in range(len(a))]
        return all(x >= y for x, y in pairs) and any(x > y for x, y in pairs)

    for low_index, low in enumerate(blocks):
        for high in blocks[low_index + 1 :]:
            for a in low.members:
                for b in high.members:
                    if dominates(a, b):
                        raise OrderInconsistent(
                            f"block '{low.id}' < '{high.id}' but tuple {a} dominates {b}"
                        )

    block_rank = {block.id: index for index, block in enumerate(blocks)}
    dev_arcs = []
    back_arcs = []
    for src, dst, delta in arcs:
        for endpoint in (src, dst):
            if endpoint not in block_rank:
                raise UnknownStateId(f"arc endpoint '{endpoint}' is not a declared block")
        arc = Arc(src, dst, delta)
        if block_rank[src] < block_rank[dst]:
            dev_arcs.append(arc)
        else:
            back_arcs.append(arc)

    parent = CanonicalDiagram(
        id="gen(" + ",".join(c.id for c in children) + ")",
        states=tuple(State(id=b.id, rank=i) for i, b in enumerate(blocks)),
        dev_arcs=tuple(dev_arcs),
        back_arcs=tuple(back_arcs),
        initial=blocks[0].id,
        final=blocks[-1].id,
    )
    return Generalization(
        parent=parent,
        children=tuple(c.id for c in children),
        blocks=tuple(blocks),
        _index=seen,
    )


def compose(
    spec: CompositionSpec, diagrams: Mapping[str, CanonicalDiagram]
) -> CanonicalDiagram | ParallelFragment | Generalization:
    """Run a declarative composition over diagrams known by id."""
    try:
        resolved = [diagrams[child_id] for child_id in spec.children]
    except KeyError as exc:
        raise UnknownStateId(f"unknown child diagram {exc}") from exc
    if spec.kind is CompositionKind.SEQUENTIAL:
        return compose_sequential(list(zip(resolved, spec.intervals)))
    if spec.kind is CompositionKind.PARALLEL:
        return compose_parallel(list(zip(resolved, spec.intervals)))
    return generalize(resolved, spec.blocks, spec.block_arcs)


# -- consistency ----------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """First requirement entry that cannot be met: unreachable when
    earliest_arrival is None, late otherwise."""

    state: str
    deadline: int
    earliest_arrival: int | None


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    witness: Witness | None = None


def dev_distances(diagram: CanonicalDiagram, source: str) -> dict[str, int]:
    """Shortest delta-weighted development distances from `source`."""
    queue = [(0, source)]
    distances: dict[str, int] = {}
    while queue:
        cost, state = heapq.heappop(queue)
        if state in distances:
            continue
        distances[state] = cost
        for arc in diagram.dev_arcs:
            if arc.src == state and arc.dst not in distances:
                heapq.heappush(queue, (cost + arc.delta, arc.dst))
    return distances


def check_consistency(
    fragment: CanonicalDiagram | ParallelFragment,
    requirement: Sequence[tuple[str, int]],
) -> ConsistencyResult:
    """Decide whether the required states are attainable in the prescribed
    time-event sequence.

    Transitions may be delayed in any state, so entry k is met at
    max(earliest arrival, previous entry's time); it fails if that exceeds
    its deadline or the state is unreachable from the predecessor position.
    """
    children = (
        fragment.children if isinstance(fragment, ParallelFragment) else (fragment,)
    )
    owner: dict[str, int] = {}
    for index, child in enumerate(children):
        for state_id in child.state_ids():
            owner.setdefault(state_id, index)
    for state_id, _ in requirement:
        if state_id not in owner:
            raise UnknownStateId(f"requirement references unknown state '{state_id}'")

    position = {i: (child.initial, 0) for i, child in enumerate(children)}
    previous_time = 0
    for state_id, deadline in requirement:
        index = owner[state_id]
        child = children[index]
        current_state, current_time = position[index]
        distances = dev_distances(child, current_state)
        if state_id not in distances:
            return ConsistencyResult(False, Witness(state_id, deadline, None))
        arrival = max(current_time + distances[state_id], previous_time)
        if arrival > deadline:
            return ConsistencyResult(False, Witness(state_id, deadline, arrival))
        position[index] = (state_id, arrival)
        previous_time = arrival
    return ConsistencyResult(True)
