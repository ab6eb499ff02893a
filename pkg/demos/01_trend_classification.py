"""Qualitative trend classification of parameter time series.

A parameter's history is reduced to one of a handful of qualitative
classes; segmentation splits a history into per-interval classes.
"""

from hierion import classify_series, segment_series
from hierion.trend import count_reversals

rising = [(t, 10.0 + 2.5 * t) for t in range(8)]
est = classify_series(rising)
print(f"steadily rising series        -> {est.trend.value}")

peaked = [(0, 1.0), (1, 4.0), (2, 6.0), (3, 5.0), (4, 2.0)]
print(f"rise then fall                -> {classify_series(peaked).trend.value}")

seasonal = [(0, 5.0), (1, 9.0), (2, 5.0), (3, 9.0), (4, 5.0), (5, 9.0)]
print(
    f"steady oscillation            -> {classify_series(seasonal).trend.value}"
    f" ({count_reversals(seasonal)} reversals)"
)

damped = [(0, 0.0), (1, 8.0), (2, 2.0), (3, 3.5)]
print(f"damped oscillation            -> {classify_series(damped).trend.value}")

# noise smaller than the tolerance reads as constant
noisy = [(t, 100.0 + (0.02 if t % 2 else -0.02)) for t in range(10)]
print(f"jitter within tolerance 0.05  -> {classify_series(noisy, eps=0.05).trend.value}")

# one history, two regimes: split at the turning point
two_phase = [(t, float(t)) for t in range(6)] + [(t, 10.0 - t) for t in range(6, 11)]
parts = segment_series(two_phase, breakpoints=[5])
print("segmented at tick 5           ->", [p.trend.value for p in parts])
