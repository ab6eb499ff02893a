"""Scenario-controlled development with coupled hierarchy levels.

Two subsystems climb their chains on individual symbols; the general symbol
g may only lift the parent once both children stand at the coupled arcs'
sources. A premature g is recorded as a redundant delivery.
"""

from pathlib import Path

from hierion import read_bundle, simulate

bundle = read_bundle(Path(__file__).parent / "data" / "coupled_bundle.json")
scenario = bundle.scenarios["coupled-early"]

result = simulate(scenario, horizon=5)

for diagram_id, trace in result.traces.items():
    steps = " ".join(f"[{e.tick}] {e.state} ({e.cause.value})" for e in trace.entries)
    print(f"{diagram_id:7s} {steps}")

print()
for event in result.events:
    if event.kind == "delivery":
        print(f"tick {event.tick}: '{event.symbol}' to {event.diagram} -> {event.outcome}")

m = result.metrics
print()
print(f"completeness          {m.completeness:.3f}")
print(f"redundancy            {m.redundancy_count}")
print(f"omitted possibilities {m.omitted_possibilities}")
print(f"complexness           {m.complexness:.3f}")
