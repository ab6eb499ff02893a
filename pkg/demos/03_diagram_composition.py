"""Composing development diagrams across time and hierarchy.

Sequential composition chains phase diagrams over disjoint intervals;
generalization builds a parent diagram over blocks of child-state tuples;
the consistency check decides whether milestones are attainable in order.
"""

from hierion import (
    StateBlock,
    TimeInterval,
    chain_diagram,
    check_consistency,
    compose_sequential,
    generalize,
)

# two project phases, one after the other
design = chain_diagram("design", ["draft", "reviewed", "approved"])
build = chain_diagram("build", ["started", "integrated", "shipped"])
project = compose_sequential(
    [(design, TimeInterval(0, 4)), (build, TimeInterval(6, 12))]
)
print(f"sequential composite '{project.id}':",
      [s.id for s in sorted(project.states, key=lambda s: s.rank)])
bridge = [a for a in project.dev_arcs if a.src == "approved"][0]
print(f"bridge arc approved -> started takes {bridge.delta} ticks")

# a two-stage parent over two six-state children
east = chain_diagram("east", [f"e{i}" for i in range(1, 7)])
west = chain_diagram("west", [f"w{i}" for i in range(1, 7)])
early = StateBlock(
    "forming",
    frozenset((e, w) for e in ("e1", "e2", "e3") for w in ("w1", "w2", "w3")),
)
late = StateBlock(
    "consolidating",
    frozenset((e, w) for e in ("e4", "e5", "e6") for w in ("w4", "w5", "w6")),
)
region = generalize([east, west], [early, late], [("forming", "consolidating", 1)])
print("parent states:", [s.id for s in region.parent.states])
print("membership (e2, w3) ->", region.membership(("e2", "w3")))
print("membership (e5, w6) ->", region.membership(("e5", "w6")))
print("membership (e1, w6) ->", region.membership(("e1", "w6")), "(mixed stage: uncovered)")

# can the composite reach 'integrated' by tick 8 and 'shipped' by tick 11?
verdict = check_consistency(project, [("integrated", 8), ("shipped", 11)])
print("milestones [integrated@8, shipped@11]:", "consistent" if verdict.consistent else "inconsistent")
late_ask = check_consistency(project, [("shipped", 5)])
print(
    "milestone [shipped@5]:",
    f"inconsistent, earliest arrival {late_ask.witness.earliest_arrival}",
)
