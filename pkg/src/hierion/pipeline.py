"""Retrospective analysis: replay stored monitoring data against a canonical
development diagram and confirm or refute the development hypothesis.

Pipeline per snapshot tick: query series, estimate trends, distribute the
population over states, fold counters, then compare against the target
schedule. Each stage failure is re-raised as PipelineError tagged with the
stage name, the typed cause attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .classify import (
    Classifier,
    DivergenceReport,
    compare_with_canonical,
    distribute,
    update_counters,
)
from .errors import (
    DanglingReference,
    DisjointnessViolated,
    EmptySchedule,
    HierionError,
    MissingData,
    NoPredicateSatisfied,
    ObjectUniverseMismatch,
    PipelineError,
)
from .model import (
    ArcCounters,
    Distribution,
    Move,
    TimeInterval,
    TrackedObject,
)
from .store import ModelBundle, MonitoringStore


@dataclass(frozen=True)
class RetrospectiveReport:
    """Distributions per snapshot, counters, anomalous moves, and the
    divergence verdict against the canonical schedule."""

    diagram: str
    classifier: str
    interval: TimeInterval
    snapshots: tuple[int, ...]
    distributions: tuple[tuple[int, Distribution], ...]
    counters: ArcCounters
    arc_history: tuple[tuple[int, tuple[tuple[str, str, int], ...]], ...]
    anomalies: tuple[tuple[int, Move], ...]
    divergence: DivergenceReport

    @property
    def verdict(self) -> str:
        return self.divergence.verdict

    def to_json_dict(self) -> dict:
        return {
            "diagram": self.diagram,
            "classifier": self.classifier,
            "interval": {"start": self.interval.start, "end": self.interval.end},
            "snapshots": list(self.snapshots),
            "distributions": [
                {
                    "tick": tick,
                    "assignment": {
                        state: sorted(members)
                        for state, members in sorted(dist.assignment.items())
                    },
                }
                for tick, dist in self.distributions
            ],
            "occupancy": [
                {"state": state, "samples": [[t, n] for t, n in samples]}
                for state, samples in sorted(self.counters.occupancy.items())
            ],
            "arc_counts": [
                {"src": src, "dst": dst, "count": count}
                for (src, dst), count in sorted(self.counters.per_arc.items())
            ],
            "arc_history": [
                {
                    "tick": tick,
                    "counts": [
                        {"src": src, "dst": dst, "count": count}
                        for src, dst, count in counts
                    ],
                }
                for tick, counts in self.arc_history
            ],
            "anomalies": [
                {"tick": tick, "object": m.object_id, "src": m.src, "dst": m.dst}
                for tick, m in self.anomalies
            ],
            "divergence": {
                "verdict": self.verdict,
                "first_violation_tick": self.divergence.first_violation_tick,
                "entries": [
                    {
                        "scheduled_tick": e.scheduled_tick,
                        "matched_tick": e.matched_tick,
                        "state": e.state,
                        "required": e.required,
                        "actual": e.actual,
                        "deviation": e.deviation,
                    }
                    for e in self.divergence.entries
                ],
            },
            "verdict": self.verdict,
        }


def _stage(stage: str, error: Exception) -> PipelineError:
    if isinstance(error, PipelineError):
        return error
    return PipelineError(stage, error)


def resolve_classifier(bundle: ModelBundle, classifier_id: str | None) -> Classifier:
    if classifier_id is not None:
        if classifier_id not in bundle.classifiers:
            raise DanglingReference(classifier_id, "retrospect classifier")
        return bundle.classifiers[classifier_id]
    if len(bundle.classifiers) != 1:
        raise DanglingReference(
            "<classifier>",
            f"retrospect needs an explicit classifier, bundle has {len(bundle.classifiers)}",
        )
    return next(iter(bundle.classifiers.values()))


def snapshot_windows(
    interval: TimeInterval, snapshots: Sequence[int]
) -> list[tuple[int, TimeInterval]]:
    """Observation window per snapshot: the interval start up to the first
    snapshot, then each inter-snapshot segment (boundaries shared)."""
    previous = interval.start
    windows = []
    for tick in snapshots:
        windows.append((tick, TimeInterval(previous, tick)))
        previous = tick
    return windows


def retrospect(
    bundle: ModelBundle,
    store: MonitoringStore,
    diagram_id: str,
    interval: TimeInterval,
    snapshots: Sequence[int],
    classifier_id: str | None = None,
    objects: Sequence[str] | None = None,
    tolerance: float = 0.0,
) -> RetrospectiveReport:
    """Run the full retrospective pipeline for one canonical diagram."""
    try:
        if diagram_id not in bundle.canonical_diagrams:
            raise DanglingReference(diagram_id, "retrospect diagram")
        diagram = bundle.canonical_diagrams[diagram_id]
        classifier = resolve_classifier(bundle, classifier_id)
        ticks = list(snapshots)
        if not ticks:
            raise EmptySchedule("no snapshot ticks given")
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ValueError(f"snapshot ticks must be strictly increasing: {ticks}")
        if not (interval.contains(ticks[0]) and interval.contains(ticks[-1])):
            raise ValueError(
                f"snapshots {ticks} outside interval [{interval.start}, {interval.end}]"
            )
    except (HierionError, ValueError) as exc:
        raise _stage("load", exc) from exc

    try:
        population_ids = tuple(objects) if objects is not None else store.object_ids()
        population: list[TrackedObject] = [
            store.tracked_object(object_id) for object_id in population_ids
        ]
        if not population:
            raise MissingData("store holds no objects to classify")
    except HierionError as exc:
        raise _stage("query", exc) from exc

    distributions: list[tuple[int, Distribution]] = []
    try:
        for tick, window in snapshot_windows(interval, ticks):
            dist = distribute(population, classifier, window, tolerance)
            # every diagram state appears, so occupancy covers the full diagram
            padded = dict(dist.assignment)
            for state in diagram.state_ids():
                padded.setdefault(state, frozenset())
            distributions.append((tick, Distribution(padded)))
    except (MissingData, NoPredicateSatisfied, DisjointnessViolated) as exc:
        raise _stage("classify", exc) from exc

    counters = ArcCounters.empty()
    anomalies: list[tuple[int, Move]] = []
    arc_history: list[tuple[int, tuple[tuple[str, str, int], ...]]] = []
    try:
        previous = distributions[0][1]
        counters, _ = update_counters(
            diagram, previous, previous, counters, distributions[0][0]
        )
        arc_history.append(
            (distributions[0][0], tuple((s, d, c) for (s, d), c in sorted(counters.per_arc.items())))
        )
        for tick, dist in distributions[1:]:
            counters, moved = update_counters(diagram, previous, dist, counters, tick)
            anomalies.extend((tick, m) for m in moved)
            arc_history.append(
                (tick, tuple((s, d, c) for (s, d), c in sorted(counters.per_arc.items())))
            )
            previous = dist
    except ObjectUniverseMismatch as exc:
        raise _stage("counters", exc) from exc

    try:
        divergence = compare_with_canonical(distributions, diagram)
    except (EmptySchedule, MissingData) as exc:
        raise _stage("compare", exc) from exc

    return RetrospectiveReport(
        diagram=diagram_id,
        classifier=classifier.id,
        interval=interval,
        snapshots=tuple(ticks),
        distributions=tuple(distributions),
        counters=counters,
        arc_history=tuple(arc_history),
        anomalies=tuple(anomalies),
        divergence=divergence,
    )
