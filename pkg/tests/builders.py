"""Shared scenario fixtures.

The two-level coupled scenario and its hand-written reference trace were
worked out by hand from the tick-step semantics (complete, deliver, upward,
decay) before the engine existed; tests compare engine output against them.
"""

from __future__ import annotations

from hierion.model import ParameterNode, State, hierarchy_from_nodes
from hierion.scenario import (
    ArcRef,
    ControlDiagram,
    CoupledGroup,
    Scenario,
    ScheduleEntry,
    SymbolDef,
    SymbolKind,
    TriggeredArc,
)


def chain_control(diagram_id, state_ids, symbols, general=(), decay_arcs=()):
    """Linear control diagram: state i moves to i+1 on symbols[i]."""
    states = tuple(State(s, i) for i, s in enumerate(state_ids))
    alphabet = tuple(
        SymbolDef(sym, SymbolKind.GENERAL if sym in general else SymbolKind.INDIVIDUAL)
        for sym in dict.fromkeys(symbols)
    )
    arcs = tuple(
        TriggeredArc(a, b, sym)
        for (a, b), sym in zip(zip(state_ids, state_ids[1:]), symbols)
    )
    return ControlDiagram(
        id=diagram_id,
        states=states,
        initial=state_ids[0],
        final=state_ids[-1],
        alphabet=alphabet,
        triggered_arcs=arcs,
        decay_arcs=tuple(decay_arcs),
    )


def two_level_hierarchy():
    return hierarchy_from_nodes(
        [
            ParameterNode("top", 0, children=("n1", "n2")),
            ParameterNode("n1", 1),
            ParameterNode("n2", 1),
        ]
    )


def coupled_scenario(early_general: bool = False) -> Scenario:
    """Two 6-state children and a 2-state parent; the general symbol g is
    bound to the parent arc coupled to child arcs (S13,S14) and (S23,S24)."""
    c1 = chain_control(
        "c1",
        [f"S1{i}" for i in range(1, 7)],
        ["step1", "step2", "step3", "step4", "step5"],
    )
    c2 = chain_control(
        "c2",
        [f"S2{i}" for i in range(1, 7)],
        ["t1", "t2", "t3", "t4", "t5"],
    )
    parent = ControlDiagram(
        id="parent",
        states=(State("S1", 0), State("S2", 1)),
        initial="S1",
        final="S2",
        alphabet=(SymbolDef("g", SymbolKind.GENERAL),),
        triggered_arcs=(TriggeredArc("S1", "S2", "g"),),
    )
    group = CoupledGroup(
        id="G",
        parent_arc=ArcRef("parent", "S1", "S2"),
        child_arcs=(ArcRef("c1", "S13", "S14"), ArcRef("c2", "S23", "S24")),
    )
    schedule = [
        ScheduleEntry(0, "step1", "c1"),
        ScheduleEntry(0, "t1", "c2"),
        ScheduleEntry(1, "step2", "c1"),
        ScheduleEntry(1, "t2", "c2"),
    ]
    if early_general:
        schedule.append(ScheduleEntry(1, "g", "parent"))
    schedule.append(ScheduleEntry(3, "g", "parent"))
    return Scenario(
        id="coupled",
        diagrams={"c1": c1, "c2": c2, "parent": parent},
        hierarchy=two_level_hierarchy(),
        mapping={"top": "parent", "n1": "c1", "n2": "c2"},
        schedule=tuple(schedule),
        coupling=(group,),
    )


# hand-written expected state timelines for coupled_scenario(early_general=True),
# horizon 5: (tick, state, cause) per diagram
HAND_TRACE = {
    "c1": (
        (0, "S11", "initial"),
        (1, "S12", "symbol"),
        (2, "S13", "symbol"),
        (4, "S14", "propagation"),
    ),
    "c2": (
        (0, "S21", "initial"),
        (1, "S22", "symbol"),
        (2, "S23", "symbol"),
        (4, "S24", "propagation"),
    ),
    "parent": ((0, "S1", "initial"), (4, "S2", "symbol")),
}

# hand-written expected event log for the same run, event for event:
# (tick, kind, diagram, detail...) where detail is
#   delivery    (symbol, outcome)
#   transition  (src, dst, cause, group)
#   complete    (src, dst, cause, group)
HAND_EVENTS = (
    (0, "delivery", "c1", ("step1", "fired")),
    (0, "transition", "c1", ("S11", "S12", "symbol", None)),
    (0, "delivery", "c2", ("t1", "fired")),
    (0, "transition", "c2", ("S21", "S22", "symbol", None)),
    (1, "complete", "c1", ("S11", "S12", "symbol", None)),
    (1, "complete", "c2", ("S21", "S22", "symbol", None)),
    (1, "delivery", "c1", ("step2", "fired")),
    (1, "transition", "c1", ("S12", "S13", "symbol", None)),
    (1, "delivery", "c2", ("t2", "fired")),
    (1, "transition", "c2", ("S22", "S23", "symbol", None)),
    (1, "delivery", "parent", ("g", "children-not-ready")),
    (2, "complete", "c1", ("S12", "S13", "symbol", None)),
    (2, "complete", "c2", ("S22", "S23", "symbol", None)),
    (3, "delivery", "parent", ("g", "fired")),
    (3, "transition", "parent", ("S1", "S2", "symbol", "G")),
    (3, "transition", "c1", ("S13", "S14", "propagation", "G")),
    (3, "transition", "c2", ("S23", "S24", "propagation", "G")),
    (4, "complete", "c1", ("S13", "S14", "propagation", "G")),
    (4, "complete", "c2", ("S23", "S24", "propagation", "G")),
    (4, "complete", "parent", ("S1", "S2", "symbol", "G")),
)


def event_essence(event):
    """Project a SimEvent onto the hand-trace vocabulary."""
    if event.kind == "delivery":
        return (event.tick, event.kind, event.diagram, (event.symbol, event.outcome))
    return (
        event.tick,
        event.kind,
        event.diagram,
        (event.src, event.dst, event.cause, event.group),
    )


def retro_csv(stuck=(), jumpy=()) -> str:
    """Monitoring CSV realizing the retro_bundle.json schedule exactly.

    Values sit in band S0 ([0,9]) through tick 2, S1 ([10,19]) through
    tick 5, and S2 ([20,30]) afterwards, so snapshots 0/4/8 with analysis
    interval [0,8] reproduce the canonical target schedule. Objects in
    `stuck` never leave S0; objects in `jumpy` skip S1 entirely.
    """
    lines = ["source,object,parameter,tick,value"]
    for object_id in ("o1", "o2", "o3", "o4"):
        for tick in range(9):
            if object_id in stuck:
                value = 2.0
            elif object_id in jumpy:
                value = 2.0 if tick <= 2 else 25.0
            else:
                value = 2.0 if tick <= 2 else 12.0 if tick <= 5 else 25.0
            lines.append(f"me,{object_id},maturity,{tick},{value}")
    return "\n".join(lines) + "\n"
