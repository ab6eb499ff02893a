"""Qualitative trend estimation over parameter time series.

The step estimator is a finite transition table over (previous class,
sign of change); the series classifier folds it over consecutive points and
applies a reversal post-pass that separates cyclic, bounded, and
unclassifiable oscillation. Comparison is |x - y| <= eps for "flat".
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import BreakpointOutOfRange, NonMonotoneTicks, TooShortSeries
from .model import TimeInterval

Point = tuple[int, float]

# amplitude band: successive swing ratios within this band count as cyclic
CYCLE_RATIO_LOW = 0.5
CYCLE_RATIO_HIGH = 2.0


class TrendClass(str, Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    CONSTANT = "Constant"
    SINGLE_PEAK = "SinglePeak"
    SINGLE_TROUGH = "SingleTrough"
    CYCLIC = "Cyclic"
    BOUNDED = "Bounded"
    UNCLASSIFIED = "Unclassified"


class _Sign(Enum):
    UP = 1
    FLAT = 0
    DOWN = -1


def _sign(x_prev: float, x_curr: float, eps: float) -> _Sign:
    diff = x_curr - x_prev
    if abs(diff) <= eps:
        return _Sign.FLAT
    return _Sign.UP if diff > 0 else _Sign.DOWN


# The table is total: every (class, sign) pair maps to exactly one class.
# Flat moves never change direction-tracking classes; a second reversal
# lands in BOUNDED, the oscillation accumulator refined by classify_series.
_STEP_TABLE: dict[tuple[TrendClass, _Sign], TrendClass] = {
    (TrendClass.CONSTANT, _Sign.UP): TrendClass.INCREASING,
    (TrendClass.CONSTANT, _Sign.FLAT): TrendClass.CONSTANT,
    (TrendClass.CONSTANT, _Sign.DOWN): TrendClass.DECREASING,
    (TrendClass.INCREASING, _Sign.UP): TrendClass.INCREASING,
    (TrendClass.INCREASING, _Sign.FLAT): TrendClass.INCREASING,
    (TrendClass.INCREASING, _Sign.DOWN): TrendClass.SINGLE_PEAK,
    (TrendClass.DECREASING, _Sign.UP): TrendClass.SINGLE_TROUGH,
    (TrendClass.DECREASING, _Sign.FLAT): TrendClass.DECREASING,
    (TrendClass.DECREASING, _Sign.DOWN): TrendClass.DECREASING,
    (TrendClass.SINGLE_PEAK, _Sign.UP): TrendClass.BOUNDED,
    (TrendClass.SINGLE_PEAK, _Sign.FLAT): TrendClass.SINGLE_PEAK,
    (TrendClass.SINGLE_PEAK, _Sign.DOWN): TrendClass.SINGLE_PEAK,
    (TrendClass.SINGLE_TROUGH, _Sign.UP): TrendClass.SINGLE_TROUGH,
    (TrendClass.SINGLE_TROUGH, _Sign.FLAT): TrendClass.SINGLE_TROUGH,
    (TrendClass.SINGLE_TROUGH, _Sign.DOWN): TrendClass.BOUNDED,
}
for _cls in (TrendClass.BOUNDED, TrendClass.CYCLIC, TrendClass.UNCLASSIFIED):
    for _s in _Sign:
        _STEP_TABLE[(_cls, _s)] = _cls


@dataclass(frozen=True)
class TrendEstimate:
    """Qualitative class of one parameter over one interval."""

    trend: TrendClass
    interval: TimeInterval
    support: tuple[Point, ...]
    tolerance: float


def step_estimate(prev: TrendClass, x_prev: float, x_curr: float, eps: float) -> TrendClass:
    """Advance the running class estimate by one observation.

    Output depends only on the previous class and the sign of the change
    relative to eps (eps >= 0).
    """
    if eps < 0:
        raise ValueError("tolerance must be non-negative")
    return _STEP_TABLE[(prev, _sign(x_prev, x_curr, eps))]


def _check_series(series: Sequence[Point]) -> None:
    if len(series) < 2:
        raise TooShortSeries(f"need at least 2 points, got {len(series)}")
    ticks = [t for t, _ in series]
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise NonMonotoneTicks("series ticks must be strictly increasing")


def _direction_runs(series: Sequence[Point], eps: float) -> list[tuple[_Sign, int]]:
    """Maximal runs of one non-flat direction: (sign, index of run's last point)."""
    runs: list[tuple[_Sign, int]] = []
    for i in range(1, len(series)):
        s = _sign(series[i - 1][1], series[i][1], eps)
        if s is _Sign.FLAT:
            continue
        if runs and runs[-1][0] is s:
            runs[-1] = (s, i)
        else:
            runs.append((s, i))
    return runs


def count_reversals(series: Sequence[Point], eps: float = 0.0) -> int:
    """Direction reversals (up<->down sign changes, flats skipped)."""
    _check_series(series)
    return max(0, len(_direction_runs(series, eps)) - 1)


def classify_series(series: Sequence[Point], eps: float = 0.0) -> TrendEstimate:
    """Classify a whole series.

    Folds step_estimate from CONSTANT over consecutive points, then refines
    the two-or-more-reversal case: successive swing amplitudes whose ratios
    stay within [0.5, 2.0] read as CYCLIC; otherwise BOUNDED when every value
    stays inside the envelope of the first swing, else UNCLASSIFIED.
    """
    _check_series(series)
    if eps < 0:
        raise ValueError("tolerance must be non-negative")
    trend = TrendClass.CONSTANT
    for (_, x_prev), (_, x_curr) in zip(series, series[1:]):
        trend = step_estimate(trend, x_prev, x_curr, eps)

    runs = _direction_runs(series, eps)
    if len(runs) - 1 >= 2:
        trend = _refine_oscillation(series, runs, eps)

    return TrendEstimate(
        trend=trend,
        interval=TimeInterval(series[0][0], series[-1][0]),
        support=tuple(series),
        tolerance=eps,
    )


def _refine_oscillation(
    series: Sequence[Point], runs: list[tuple[_Sign, int]], eps: float
) -> TrendClass:
    values = [v for _, v in series]
    turning = [values[0]] + [values[end] for _, end in runs]
    swings = [abs(b - a) for a, b in zip(turning, turning[1:])]
    ratios = [b / a for a, b in zip(swings, swings[1:])]
    if all(CYCLE_RATIO_LOW <= r <= CYCLE_RATIO_HIGH for r in ratios):
        return TrendClass.CYCLIC
    first_window = values[: runs[0][1] + 1]
    low, high = min(first_window) - eps, max(first_window) + eps
    if all(low <= v <= high for v in values):
        return TrendClass.BOUNDED
    return TrendClass.UNCLASSIFIED


def segment_series(
    series: Sequence[Point], breakpoints: Sequence[int], eps: float = 0.0
) -> list[TrendEstimate]:
    """Classify each sub-interval between breakpoints independently.

    Breakpoint ticks must be strictly increasing and lie strictly inside the
    series tick range; boundary points belong to both adjacent segments so
    the segments cover [first tick, last tick] without gaps.
    """
    _check_series(series)
    first, last = series[0][0], series[-1][0]
    previous: int | None = None
    for bp in breakpoints:
        if not (first < bp < last):
            raise BreakpointOutOfRange(
                f"breakpoint {bp} outside open range ({first}, {last})"
            )
        if previous is not None and bp <= previous:
            raise BreakpointOutOfRange(
                f"breakpoints must be strictly increasing, got {bp} after {previous}"
            )
        previous = bp

    bounds = [first, *breakpoints, last]
    estimates = []
    for lo, hi in zip(bounds, bounds[1:]):
        piece = [(t, v) for t, v in series if lo <= t <= hi]
        estimates.append(classify_series(piece, eps))
    return estimates
