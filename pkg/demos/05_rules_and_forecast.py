"""Directive planning: elementary rules, goal trees, and forecast search.

Rules transfer subsystems between states at a time and resource cost; the
forecast searches for the cheapest rule sequence that realizes the support
states of a partial development diagram.
"""

from hierion import (
    ElementaryRule,
    GoalNode,
    GoalTree,
    Infeasible,
    PartialDiagram,
    State,
    SupportState,
    forecast,
    initial_control_state,
    run_goal_tree,
)
from hierion.scenario import ControlDiagram

plant = ControlDiagram(
    id="plant",
    states=tuple(State(s, i) for i, s in enumerate(["idle", "tooled", "running", "optimized"])),
    initial="idle",
    final="optimized",
    alphabet=(),
    triggered_arcs=(),
)

tool_up = ElementaryRule("tool-up", "plant", "idle", "tooled", "optimized", "install tooling", 4.0, 2)
start = ElementaryRule("start", "plant", "tooled", "running", "idle", "start production", 2.0, 1)
tune = ElementaryRule("tune", "plant", "running", "optimized", "idle", "tune line", 3.0, 2)

system = initial_control_state({"plant": plant}, pool=12.0)

tree = GoalTree(
    "commission",
    GoalNode(
        "root",
        children=(
            GoalNode("prepare", rule=tool_up),
            GoalNode("operate", children=(GoalNode("go", rule=start), GoalNode("opt", rule=tune))),
        ),
    ),
)
report = run_goal_tree(tree, system)
print(f"goal tree succeeded: {report.succeeded}; pool left {report.remaining_pool}")
for record in report.records:
    outcome = "ok" if record.outcome.applied else record.outcome.failure.value
    print(f"  {record.node}: rule '{record.rule}' -> {outcome}")

partial = PartialDiagram(
    "commissioning",
    (
        SupportState("plant", "running", 4),
        SupportState("plant", "optimized", 6),
    ),
    max_resources=10.0,
)
plan = forecast(system, [tool_up, start, tune], partial)
if isinstance(plan, Infeasible):
    print("infeasible; satisfiable prefix:", [s.state for s in plan.satisfied_prefix])
else:
    print(f"plan found: {plan.total_ticks} ticks, {plan.total_resources} resources")
    for step in plan.steps:
        print(
            f"  t{step.started}-t{step.completed}: {step.rule.action} "
            f"({step.rule.source} -> {step.rule.target}), spent so far {step.cumulative_resources}"
        )
    print("predicted chain:", " -> ".join(s.id for s in plan.diagram.states))

# tighten the budget until the plan collapses
tight = PartialDiagram("rushed", partial.support_states, max_resources=5.0)
outcome = forecast(system, [tool_up, start, tune], tight)
print(
    "with a 5.0 resource budget:",
    "infeasible" if isinstance(outcome, Infeasible) else "still feasible",
)
