"""Core model type and operation tests."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from hierion.errors import ObjectUniverseMismatch
from hierion.model import (
    Arc,
    ArcCounters,
    CanonicalDiagram,
    Move,
    ParameterNode,
    State,
    StateTrace,
    StateTraceEntry,
    TimeInterval,
    TrackedObject,
    TransitionCause,
    apply_moves,
    distribution,
    distribution_delta,
    hierarchy_from_nodes,
    validate_diagram,
)


class TestTimeInterval:
    def test_point_interval_allowed(self):
        assert TimeInterval(3, 3).length() == 0

    def test_inverted_rejected(self):
        with pytest.raises(ValueError):
            TimeInterval(4, 3)

    def test_contains_is_closed(self):
        iv = TimeInterval(0, 10)
        assert iv.contains(0) and iv.contains(10) and not iv.contains(11)


class TestHierarchy:
    def test_two_level_tree(self):
        h = hierarchy_from_nodes(
            [
                ParameterNode("root", 0, children=("a", "b")),
                ParameterNode("a", 1),
                ParameterNode("b", 1, polymorphic=True),
            ]
        )
        assert h.parent_of("a") == "root"
        assert h.children_of("root") == ("a", "b")

    def test_bad_child_level_rejected(self):
        with pytest.raises(ValueError, match="level"):
            hierarchy_from_nodes(
                [ParameterNode("root", 0, children=("a",)), ParameterNode("a", 2)]
            )

    def test_orphan_rejected(self):
        with pytest.raises(ValueError, match="unreachable"):
            hierarchy_from_nodes([ParameterNode("root", 0), ParameterNode("b", 1)])


class TestTrackedObject:
    def test_non_monotone_series_rejected(self):
        with pytest.raises(ValueError):
            TrackedObject("o", 0, {"p": ((2, 1.0), (2, 2.0))})


def two_state_diagram(extra_dev=(), extra_back=(), schedule=()):
    return CanonicalDiagram(
        id="d",
        states=(State("A", 0), State("B", 1)),
        dev_arcs=(Arc("A", "B", 1), *extra_dev),
        back_arcs=tuple(extra_back),
        initial="A",
        final="B",
        target_schedule=tuple(schedule),
    )


class TestValidateDiagram:
    def test_minimal_legal_diagram(self):
        assert validate_diagram(two_state_diagram()) == []

    def test_rank_inverted_dev_arc(self):
        report = validate_diagram(two_state_diagram(extra_dev=(Arc("B", "A", 1),)))
        assert report == ["devArc violates rank order: (B,A)"]

    def test_non_disjoint_schedule_distribution(self):
        bad = distribution({"A": {"o1"}, "B": {"o1"}})
        report = validate_diagram(two_state_diagram(schedule=[(0, bad)]))
        assert any("distribution not disjoint" in line for line in report)

    def test_backstep_must_decrease_rank(self):
        report = validate_diagram(two_state_diagram(extra_back=(Arc("A", "B", 1),)))
        assert any("backArc violates rank order" in line for line in report)

    def test_initial_must_be_minimal(self):
        d = CanonicalDiagram(
            id="d",
            states=(State("A", 0), State("B", 1)),
            dev_arcs=(Arc("A", "B"),),
            back_arcs=(),
            initial="B",
            final="B",
        )
        assert any("minimal rank" in line for line in validate_diagram(d))

    def test_arc_both_dev_and_back(self):
        d = two_state_diagram(extra_back=(Arc("B", "A"),), extra_dev=())
        # (B, A) only as backstep: fine
        assert validate_diagram(d) == []
        both = CanonicalDiagram(
            id="d",
            states=(State("A", 0), State("B", 1)),
            dev_arcs=(Arc("A", "B"),),
            back_arcs=(Arc("A", "B"),),
            initial="A",
            final="B",
        )
        assert any("both development and backstep" in line for line in validate_diagram(both))

    def test_unknown_state_in_arc(self):
        report = validate_diagram(two_state_diagram(extra_dev=(Arc("A", "Z"),)))
        assert any("unknown state 'Z'" in line for line in report)


class TestDistributionDelta:
    def test_identity_is_empty(self):
        d = distribution({"A": {"o1"}, "B": {"o2"}})
        assert distribution_delta(d, d) == frozenset()

    def test_single_move(self):
        prev = distribution({"A": {"o1"}, "B": set()})
        next_ = distribution({"A": set(), "B": {"o1"}})
        assert distribution_delta(prev, next_) == frozenset({Move("o1", "A", "B")})

    def test_universe_mismatch(self):
        with pytest.raises(ObjectUniverseMismatch):
            distribution_delta(
                distribution({"A": {"o1"}}), distribution({"A": {"o1", "o2"}})
            )


class TestArcCounters:
    def test_increment_and_occupancy(self):
        c = ArcCounters.empty().with_increment("A", "B").with_increment("A", "B")
        assert c.arc_count("A", "B") == 2
        c = c.with_occupancy(["A", "B"], distribution({"B": {"o1"}}), tick=3)
        assert c.occupancy_at("A", 3) == 0
        assert c.occupancy_at("B", 3) == 1


class TestStateTrace:
    def test_state_at_is_step_function(self):
        trace = StateTrace(
            "d",
            (
                StateTraceEntry(0, "A", TransitionCause.INITIAL),
                StateTraceEntry(4, "B", TransitionCause.SYMBOL),
            ),
        )
        assert trace.state_at(0) == "A"
        assert trace.state_at(3) == "A"
        assert trace.state_at(4) == "B"
        assert trace.final_state() == "B"

    def test_decreasing_ticks_rejected(self):
        with pytest.raises(ValueError):
            StateTrace(
                "d",
                (
                    StateTraceEntry(4, "A", TransitionCause.INITIAL),
                    StateTraceEntry(0, "B", TransitionCause.SYMBOL),
                ),
            )


# -- property tests -----------------------------------------------------------

state_count = st.integers(min_value=2, max_value=8)


@st.composite
def random_chain_diagrams(draw):
    n = draw(state_count)
    ids = [f"S{i}" for i in range(n)]
    extra_dev = draw(
        st.lists(
            st.tuples(st.integers(0, n - 2), st.integers(1, n - 1)).filter(lambda p: p[0] < p[1]),
            max_size=4,
        )
    )
    back = draw(
        st.lists(
            st.tuples(st.integers(1, n - 1), st.integers(0, n - 2)).filter(lambda p: p[1] < p[0]),
            max_size=3,
        )
    )
    return CanonicalDiagram(
        id="r",
        states=tuple(State(s, i) for i, s in enumerate(ids)),
        dev_arcs=tuple(Arc(ids[a], ids[b]) for a, b in {*extra_dev, *((i, i + 1) for i in range(n - 1))}),
        back_arcs=tuple(Arc(ids[a], ids[b]) for a, b in set(back)),
        initial=ids[0],
        final=ids[-1],
    )


class TestProperties:
    @given(random_chain_diagrams())
    def test_generated_rank_respecting_diagrams_validate(self, diagram):
        assert validate_diagram(diagram) == []
        for arc in diagram.dev_arcs:
            assert diagram.rank_of(arc.src) < diagram.rank_of(arc.dst)
        for arc in diagram.back_arcs:
            assert diagram.rank_of(arc.dst) < diagram.rank_of(arc.src)

    @given(
        st.dictionaries(
            st.sampled_from(["o1", "o2", "o3", "o4", "o5"]),
            st.sampled_from(["A", "B", "C"]),
            min_size=1,
        ),
        st.dictionaries(
            st.sampled_from(["o1", "o2", "o3", "o4", "o5"]),
            st.sampled_from(["A", "B", "C"]),
            min_size=1,
        ),
    )
    def test_delta_roundtrip(self, prev_map, next_map):
        # force equal universes by intersecting
        universe = sorted(set(prev_map) & set(next_map))
        if not universe:
            return
        prev = _to_distribution({o: prev_map[o] for o in universe})
        next_ = _to_distribution({o: next_map[o] for o in universe})
        moves = distribution_delta(prev, next_)
        replayed = apply_moves(prev, moves)
        for obj in universe:
            assert replayed.state_of(obj) == next_.state_of(obj)


def _to_distribution(obj_to_state):
    assignment: dict[str, set[str]] = {}
    for obj, state in obj_to_state.items():
        assignment.setdefault(state, set()).add(obj)
    return distribution(assignment)
