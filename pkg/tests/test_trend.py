"""Trend estimation tests.

EXPECTED_STEPS is the independent oracle for the step table: every
(class, sign-of-change) pair enumerated by hand, frozen here, and checked
exhaustively against step_estimate with representative numeric inputs.
"""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from hierion.errors import BreakpointOutOfRange, NonMonotoneTicks, TooShortSeries
from hierion.trend import (
    TrendClass as T,
    classify_series,
    count_reversals,
    segment_series,
    step_estimate,
)

# sign -> (x_prev, x_curr) with eps = 0.1
SIGN_INPUTS = {"up": (5.0, 6.0), "flat": (5.0, 5.05), "down": (5.0, 4.0)}

EXPECTED_STEPS = {
    (T.CONSTANT, "up"): T.INCREASING,
    (T.CONSTANT, "flat"): T.CONSTANT,
    (T.CONSTANT, "down"): T.DECREASING,
    (T.INCREASING, "up"): T.INCREASING,
    (T.INCREASING, "flat"): T.INCREASING,
    (T.INCREASING, "down"): T.SINGLE_PEAK,
    (T.DECREASING, "up"): T.SINGLE_TROUGH,
    (T.DECREASING, "flat"): T.DECREASING,
    (T.DECREASING, "down"): T.DECREASING,
    (T.SINGLE_PEAK, "up"): T.BOUNDED,
    (T.SINGLE_PEAK, "flat"): T.SINGLE_PEAK,
    (T.SINGLE_PEAK, "down"): T.SINGLE_PEAK,
    (T.SINGLE_TROUGH, "up"): T.SINGLE_TROUGH,
    (T.SINGLE_TROUGH, "flat"): T.SINGLE_TROUGH,
    (T.SINGLE_TROUGH, "down"): T.BOUNDED,
    (T.BOUNDED, "up"): T.BOUNDED,
    (T.BOUNDED, "flat"): T.BOUNDED,
    (T.BOUNDED, "down"): T.BOUNDED,
    (T.CYCLIC, "up"): T.CYCLIC,
    (T.CYCLIC, "flat"): T.CYCLIC,
    (T.CYCLIC, "down"): T.CYCLIC,
    (T.UNCLASSIFIED, "up"): T.UNCLASSIFIED,
    (T.UNCLASSIFIED, "flat"): T.UNCLASSIFIED,
    (T.UNCLASSIFIED, "down"): T.UNCLASSIFIED,
}


class TestStepEstimate:
    def test_matches_enumerated_table_on_all_inputs(self):
        for (prev, sign), expected in EXPECTED_STEPS.items():
            x_prev, x_curr = SIGN_INPUTS[sign]
            assert step_estimate(prev, x_prev, x_curr, 0.1) == expected, (prev, sign)

    def test_flat_within_tolerance_keeps_constant(self):
        assert step_estimate(T.CONSTANT, 5.0, 5.0, 0.1) == T.CONSTANT

    def test_first_reversal_down_is_peak(self):
        assert step_estimate(T.INCREASING, 5.0, 4.0, 0.1) == T.SINGLE_PEAK

    def test_first_reversal_up_is_trough(self):
        assert step_estimate(T.DECREASING, 4.0, 5.0, 0.1) == T.SINGLE_TROUGH

    def test_negative_tolerance_rejected(self):
        with pytest.raises(ValueError):
            step_estimate(T.CONSTANT, 1.0, 1.0, -0.5)


class TestClassifySeries:
    def test_strictly_monotone_is_increasing(self):
        est = classify_series([(0, 1.0), (1, 2.0), (2, 3.0)], 0.0)
        assert est.trend == T.INCREASING
        assert est.interval.start == 0 and est.interval.end == 2

    def test_equal_swings_are_cyclic(self):
        # 3 reversals, all swing amplitudes 2 -> ratio 1 everywhere
        series = [(0, 1.0), (1, 3.0), (2, 1.0), (3, 3.0), (4, 1.0)]
        assert count_reversals(series, 0.0) == 3
        assert classify_series(series, 0.0).trend == T.CYCLIC

    def test_single_point_too_short(self):
        with pytest.raises(TooShortSeries):
            classify_series([(0, 1.0)])

    def test_non_monotone_ticks_rejected(self):
        with pytest.raises(NonMonotoneTicks):
            classify_series([(0, 1.0), (0, 2.0)])

    def test_one_peak(self):
        assert classify_series([(0, 1.0), (1, 3.0), (2, 2.0)]).trend == T.SINGLE_PEAK

    def test_one_trough(self):
        assert classify_series([(0, 3.0), (1, 1.0), (2, 2.0)]).trend == T.SINGLE_TROUGH

    def test_damped_oscillation_is_bounded(self):
        # swings 4, 3, 1: ratio 1/3 leaves the cyclic band; stays inside the
        # first swing's envelope [0, 4]
        series = [(0, 0.0), (1, 4.0), (2, 1.0), (3, 2.0)]
        assert classify_series(series).trend == T.BOUNDED

    def test_escaping_oscillation_is_unclassified(self):
        # swings 1, 3, 7: breakout above the first envelope [0, 1]
        series = [(0, 0.0), (1, 1.0), (2, -2.0), (3, 5.0)]
        assert classify_series(series).trend == T.UNCLASSIFIED

    def test_plateau_keeps_increasing(self):
        assert classify_series([(0, 1.0), (1, 2.0), (2, 2.0), (3, 3.0)]).trend == T.INCREASING

    def test_all_flat_is_constant(self):
        assert classify_series([(0, 5.0), (1, 5.0), (2, 5.0)]).trend == T.CONSTANT


class TestSegmentSeries:
    SERIES = [(t, float(t) if t <= 5 else 10.0 - t) for t in range(11)]

    def test_no_breakpoints_equals_classify(self):
        [est] = segment_series(self.SERIES, [])
        assert est.trend == classify_series(self.SERIES).trend
        assert est.support == tuple(self.SERIES)

    def test_rise_fall_split_at_peak(self):
        # oracle: classify_series applied independently to each slice
        first, second = segment_series(self.SERIES, [5])
        assert first.trend == classify_series(self.SERIES[:6]).trend == T.INCREASING
        assert second.trend == classify_series(self.SERIES[5:]).trend == T.DECREASING

    def test_segments_cover_range_without_gaps(self):
        parts = segment_series(self.SERIES, [3, 7])
        assert parts[0].interval.start == 0
        assert parts[-1].interval.end == 10
        for a, b in zip(parts, parts[1:]):
            assert a.interval.end == b.interval.start

    def test_breakpoint_out_of_range(self):
        with pytest.raises(BreakpointOutOfRange):
            segment_series(self.SERIES, [99])

    def test_breakpoints_must_increase(self):
        with pytest.raises(BreakpointOutOfRange):
            segment_series(self.SERIES, [7, 3])


monotone_deltas = st.lists(st.floats(min_value=0.01, max_value=50.0), min_size=1, max_size=40)


class TestProperties:
    @given(monotone_deltas)
    def test_monotone_soundness_increasing(self, deltas):
        series, value = [(0, 0.0)], 0.0
        for i, d in enumerate(deltas, start=1):
            value += d
            series.append((i, value))
        assert classify_series(series, 0.0).trend == T.INCREASING

    @given(monotone_deltas)
    def test_monotone_soundness_decreasing(self, deltas):
        series, value = [(0, 0.0)], 0.0
        for i, d in enumerate(deltas, start=1):
            value -= d
            series.append((i, value))
        assert classify_series(series, 0.0).trend == T.DECREASING

    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=30),
        st.floats(min_value=0, max_value=5),
        st.floats(min_value=0, max_value=5),
    )
    def test_tolerance_monotonicity(self, values, eps_a, eps_b):
        series = [(i, v) for i, v in enumerate(values)]
        lo, hi = sorted([eps_a, eps_b])
        assert count_reversals(series, hi) <= count_reversals(series, lo)

    @given(st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=30))
    def test_determinism(self, values):
        series = [(i, v) for i, v in enumerate(values)]
        assert classify_series(series, 0.5).trend == classify_series(series, 0.5).trend
