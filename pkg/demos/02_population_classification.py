"""Placing a population of monitored objects onto canonical states.

A scale maps value bands to ordered states; the classifier places each
object, counters track movement along (and off) the declared arcs, and the
divergence report compares reality with the hypothesized schedule.
"""

from hierion import (
    ArcCounters,
    Classifier,
    Predicate,
    Scale,
    TimeInterval,
    TrackedObject,
    ValueIn,
    chain_diagram,
    compare_with_canonical,
    distribute,
    update_counters,
)

classifier = Classifier(
    id="maturity-bands",
    root=Scale(
        predicates=(
            Predicate("low", ValueIn("maturity", 0, 9)),
            Predicate("mid", ValueIn("maturity", 10, 19)),
            Predicate("high", ValueIn("maturity", 20, 30)),
        ),
        states=("seed", "growing", "mature"),
    ),
    interval=TimeInterval(0, 6),
)

def series(*values):
    return {"maturity": tuple((t, v) for t, v in enumerate(values))}

population = [
    TrackedObject("farm-a", 1, series(2, 3, 5, 11, 14, 18, 24)),
    TrackedObject("farm-b", 1, series(1, 2, 4, 12, 15, 17, 22)),
    TrackedObject("farm-c", 1, series(3, 3, 4, 4, 5, 5, 6)),  # never develops
]

diagram = chain_diagram("development", ["seed", "growing", "mature"])

counters = ArcCounters.empty()
snapshots = []
previous = None
for tick in (2, 4, 6):
    window = TimeInterval(0, tick)
    dist = distribute(population, classifier, window)
    snapshots.append((tick, dist))
    print(f"tick {tick}: " + ", ".join(f"{s}={sorted(m)}" for s, m in sorted(dist.assignment.items())))
    if previous is not None:
        counters, anomalies = update_counters(diagram, previous, dist, counters, tick)
        for move in anomalies:
            print(f"  anomalous move: {move.object_id} {move.src} -> {move.dst}")
    else:
        counters, _ = update_counters(diagram, dist, dist, counters, tick)
    previous = dist

print("arc traffic:", {f"{s}->{d}": n for (s, d), n in sorted(counters.per_arc.items())})
