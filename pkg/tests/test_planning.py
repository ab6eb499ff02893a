"""Planning tests: rules, goal trees, partial diagrams, forecast."""

from __future__ import annotations

import pytest

from hierion.errors import UnknownStateId
from hierion.model import State, StateTrace, StateTraceEntry, TransitionCause
from hierion.planning import (
    ElementaryRule,
    GoalNode,
    GoalTree,
    Infeasible,
    PartialDiagram,
    Plan,
    RuleFailure,
    SupportState,
    apply_rule,
    check_partial_diagram,
    forecast,
    initial_control_state,
    run_goal_tree,
)
from hierion.scenario import ControlDiagram, DecayArc

from tests.oracles import forecast_oracle


def bare_diagram(diagram_id, state_ids, decay_arcs=()):
    """Control diagram with no symbol machinery; rules do all the moving."""
    return ControlDiagram(
        id=diagram_id,
        states=tuple(State(s, i) for i, s in enumerate(state_ids)),
        initial=state_ids[0],
        final=state_ids[-1],
        alphabet=(),
        triggered_arcs=(),
        decay_arcs=tuple(decay_arcs),
    )


def rule(rid, subsystem, source, target, forbidden="Z", cost=0.0, duration=1):
    return ElementaryRule(
        id=rid,
        subsystem=subsystem,
        source=source,
        target=target,
        forbidden=forbidden,
        action=f"act-{rid}",
        resources=cost,
        duration=duration,
    )


class TestElementaryRule:
    def test_source_equals_target_rejected(self):
        with pytest.raises(ValueError):
            rule("r", "w", "A", "A")

    def test_forbidden_equals_source_rejected(self):
        with pytest.raises(ValueError):
            ElementaryRule("r", "w", "A", "B", "A", "act", 0.0, 1)

    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError):
            rule("r", "w", "A", "B", duration=0)


# diagram with a decay arc dropping A back into Z
GUARDED = bare_diagram("w", ["Z", "A", "B"], decay_arcs=(DecayArc("A", "Z", 1),))
CALM = bare_diagram("w", ["Z", "A", "B"])


class TestApplyRule:
    NOMINAL = ElementaryRule("r1", "w", "A", "B", "Z", "act", 2.0, 3)

    def start(self, diagram=CALM, pool=5.0):
        return initial_control_state({"w": diagram}, pool=pool, states={"w": "A"})

    def test_nominal_application(self):
        state, outcome = apply_rule(self.NOMINAL, self.start())
        assert outcome.applied and outcome.completed == 3
        assert state.states["w"] == "B"
        assert state.pool == 3.0
        assert state.tick == 3

    def test_insufficient_resources(self):
        state, outcome = apply_rule(self.NOMINAL, self.start(pool=1.0))
        assert outcome.failure is RuleFailure.INSUFFICIENT_RESOURCES
        assert state.states["w"] == "A" and state.pool == 1.0

    def test_wrong_source_state(self):
        start = initial_control_state({"w": CALM}, pool=5.0, states={"w": "Z"})
        _, outcome = apply_rule(self.NOMINAL, start)
        assert outcome.failure is RuleFailure.WRONG_SOURCE_STATE

    def test_forbidden_backstep_aborts_and_sinks_expense(self):
        # decay due at tick 1, inside the 3-tick window, target is forbidden
        state, outcome = apply_rule(self.NOMINAL, self.start(diagram=GUARDED))
        assert outcome.failure is RuleFailure.FORBIDDEN_BACKSTEP
        assert outcome.spent == 2.0
        assert state.states["w"] == "Z"
        assert state.pool == 3.0  # no refund

    def test_decay_into_other_state_is_held_off(self):
        diagram = bare_diagram("w", ["Y", "A", "B"], decay_arcs=(DecayArc("A", "Y", 1),))
        r = ElementaryRule("r1", "w", "A", "B", "Z", "act", 2.0, 3)
        start = initial_control_state({"w": diagram}, pool=5.0, states={"w": "A"})
        state, outcome = apply_rule(r, start)
        assert outcome.applied and state.states["w"] == "B"

    def test_unknown_subsystem(self):
        with pytest.raises(UnknownStateId):
            apply_rule(rule("r", "nope", "A", "B"), self.start())


class TestGoalTree:
    def test_internal_with_rule_rejected(self):
        with pytest.raises(ValueError):
            GoalNode("g", children=(GoalNode("t", rule=rule("r", "w", "A", "B")),), rule=rule("r2", "w", "A", "B"))

    def test_single_terminal_success(self):
        tree = GoalTree("g", GoalNode("t", rule=rule("r", "w", "A", "B", cost=1.0)))
        start = initial_control_state({"w": CALM}, pool=5.0, states={"w": "A"})
        report = run_goal_tree(tree, start)
        assert report.succeeded
        assert report.final.states["w"] == "B"
        assert report.remaining_pool == 4.0

    def test_order_dependence(self):
        first = rule("r1", "w", "A", "B")
        second = rule("r2", "w", "B", "Z", forbidden="A")
        start = initial_control_state({"w": CALM}, pool=5.0, states={"w": "A"})

        good = GoalTree(
            "g",
            GoalNode(
                "root",
                children=(GoalNode("n1", rule=first), GoalNode("n2", rule=second)),
            ),
        )
        assert run_goal_tree(good, start).succeeded

        bad = GoalTree(
            "g",
            GoalNode(
                "root",
                children=(GoalNode("n2", rule=second), GoalNode("n1", rule=first)),
            ),
        )
        report = run_goal_tree(bad, start)
        assert not report.succeeded
        assert report.first_failure == "n2"
        assert report.records[0].outcome.failure is RuleFailure.WRONG_SOURCE_STATE

    def test_failure_marks_subtree_but_siblings_run(self):
        tree = GoalTree(
            "g",
            GoalNode(
                "root",
                children=(
                    GoalNode(
                        "left",
                        children=(
                            GoalNode("expensive", rule=rule("r1", "w", "A", "B", cost=99.0)),
                        ),
                    ),
                    GoalNode("right", children=(GoalNode("cheap", rule=rule("r2", "w", "A", "B")),)),
                ),
            ),
        )
        start = initial_control_state({"w": CALM}, pool=1.0, states={"w": "A"})
        report = run_goal_tree(tree, start)
        assert not report.succeeded
        assert report.first_failure == "expensive"
        assert report.results == {
            "expensive": False,
            "left": False,
            "cheap": True,
            "right": True,
            "root": False,
        }
        # every terminal was still executed
        assert [r.node for r in report.records] == ["expensive", "cheap"]

    def test_pool_accounting_includes_aborted_rules(self):
        aborting = ElementaryRule("r1", "w", "A", "B", "Z", "act", 2.0, 3)
        tree = GoalTree(
            "g",
            GoalNode(
                "root",
                children=(
                    GoalNode("n1", rule=aborting),
                    GoalNode("n2", rule=rule("r2", "w", "Z", "A", forbidden="B", cost=1.0)),
                ),
            ),
        )
        start = initial_control_state({"w": GUARDED}, pool=10.0, states={"w": "A"})
        report = run_goal_tree(tree, start)
        spent = sum(r.outcome.spent for r in report.records)
        assert report.remaining_pool == 10.0 - spent == 7.0


def trace_of(diagram_id, *entries):
    return StateTrace(
        diagram_id,
        tuple(StateTraceEntry(t, s, TransitionCause(c)) for t, s, c in entries),
    )


class TestCheckPartialDiagram:
    TRACES = {
        "w": trace_of(
            "w", (0, "A", "initial"), (2, "B", "rule"), (5, "C", "rule")
        )
    }

    def test_initial_final_pair_confirmed(self):
        partial = PartialDiagram(
            "p",
            (SupportState("w", "A", 0), SupportState("w", "C", 8)),
        )
        assert check_partial_diagram(self.TRACES, partial, horizon=8).confirmed

    def test_unvisited_support_refuted(self):
        partial = PartialDiagram("p", (SupportState("w", "X", 5),))
        result = check_partial_diagram(self.TRACES, partial)
        assert not result.confirmed
        assert result.first_miss == SupportState("w", "X", 5)
        assert result.actual_state == "C"

    def test_order_respected(self):
        # C is reached after B, so asking C-then-B with tight deadline fails
        partial = PartialDiagram(
            "p", (SupportState("w", "C", 5), SupportState("w", "B", 5))
        )
        result = check_partial_diagram(self.TRACES, partial)
        assert not result.confirmed and result.first_miss.state == "B"

    def test_budget_overrun_flagged(self):
        partial = PartialDiagram(
            "p",
            (SupportState("w", "C", 8),),
            max_resources=3.0,
        )
        result = check_partial_diagram(self.TRACES, partial, resources_spent=4.5)
        assert not result.confirmed
        assert "resources" in result.budget_violation

    def test_tick_budget(self):
        partial = PartialDiagram("p", (SupportState("w", "C", 8),), max_ticks=4)
        result = check_partial_diagram(self.TRACES, partial, horizon=6)
        assert not result.confirmed and "horizon" in result.budget_violation

    def test_unknown_trace(self):
        partial = PartialDiagram("p", (SupportState("nope", "A", 1),))
        with pytest.raises(UnknownStateId):
            check_partial_diagram(self.TRACES, partial)


CHAIN = bare_diagram("w", ["A", "B", "C"])
AB = rule("ab", "w", "A", "B", duration=2, cost=1.0)
BC = rule("bc", "w", "B", "C", duration=1, cost=1.0)


class TestForecast:
    def test_already_satisfied_gives_empty_plan(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        partial = PartialDiagram("p", (SupportState("w", "A", 3),))
        result = forecast(start, [AB, BC], partial)
        assert isinstance(result, Plan)
        assert result.steps == ()
        assert result.total_ticks == 0

    def test_two_rule_chain_to_deadline(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        partial = PartialDiagram("p", (SupportState("w", "C", 3),))
        result = forecast(start, [AB, BC], partial)
        assert isinstance(result, Plan)
        assert [s.rule.id for s in result.steps] == ["ab", "bc"]
        assert result.total_ticks == 3
        # oracle agrees on the minimum
        best, _ = forecast_oracle(start, [AB, BC], partial)
        assert best is not None and best[0] == 3

    def test_impossible_deadline_infeasible_with_prefix(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        partial = PartialDiagram("p", (SupportState("w", "C", 2),))
        result = forecast(start, [AB, BC], partial)
        assert isinstance(result, Infeasible)
        best, prefix = forecast_oracle(start, [AB, BC], partial)
        assert best is None
        assert len(result.satisfied_prefix) == prefix == 0

    def test_induced_diagram_chains_support_states(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        partial = PartialDiagram(
            "p", (SupportState("w", "B", 2), SupportState("w", "C", 4))
        )
        result = forecast(start, [AB, BC], partial)
        assert isinstance(result, Plan)
        diagram = result.diagram
        assert [s.id for s in diagram.states] == ["w.B", "w.C"]
        assert [(a.src, a.dst, a.delta) for a in diagram.dev_arcs] == [("w.B", "w.C", 1)]

    def test_resource_budget_blocks_plan(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        partial = PartialDiagram(
            "p", (SupportState("w", "C", 5),), max_resources=1.5
        )
        result = forecast(start, [AB, BC], partial)
        assert isinstance(result, Infeasible)

    def test_two_subsystem_plan_matches_oracle(self):
        d1 = bare_diagram("w1", ["A", "B", "C"])
        d2 = bare_diagram("w2", ["P", "Q"])
        rules = [
            rule("r1", "w1", "A", "B", duration=1, cost=1.0),
            rule("r2", "w1", "B", "C", duration=2, cost=1.0),
            rule("r3", "w2", "P", "Q", duration=1, cost=2.0),
        ]
        start = initial_control_state({"w1": d1, "w2": d2}, pool=10.0)
        partial = PartialDiagram(
            "p", (SupportState("w2", "Q", 2), SupportState("w1", "C", 5))
        )
        result = forecast(start, rules, partial)
        best, _ = forecast_oracle(start, rules, partial)
        assert isinstance(result, Plan)
        assert best is not None and result.total_ticks == best[0]

    def test_unknown_support_state(self):
        start = initial_control_state({"w": CHAIN}, pool=5.0)
        with pytest.raises(UnknownStateId):
            forecast(start, [AB], PartialDiagram("p", (SupportState("w", "X", 3),)))
