"""Ordered predicate scales, hierarchical classifiers, population distribution
over canonical states, arc counters, and retrospective comparison.

Truth-domain disjointness of a scale is verified dynamically (probe-based and
again on every classification) because predicates over reals are not
statically decidable in general.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    DisjointnessViolated,
    EmptySchedule,
    MissingData,
    NoPredicateSatisfied,
)
from .model import (
    ArcCounters,
    CanonicalDiagram,
    Distribution,
    Move,
    TimeInterval,
    TrackedObject,
    distribution_delta,
)
from .trend import TrendClass, classify_series

# -- formula language ----------------------------------------------------------

@dataclass(frozen=True)
class TrendIs:
    parameter: str
    trend: TrendClass


@dataclass(frozen=True)
class ValueIn:
    """Closed interval test on the parameter's current value."""

    parameter: str
    low: float
    high: float

    def __post_init__(self) -> None:
        if self.high < self.low:
            raise ValueError(f"empty interval [{self.low}, {self.high}]")


@dataclass(frozen=True)
class And:
    terms: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    terms: tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    term: "Formula"


Formula = Union[TrendIs, ValueIn, And, Or, Not]


@dataclass(frozen=True)
class Evaluation:
    """Snapshot of an object's qualitative situation over one window:
    a representative value and a trend class per parameter."""

    values: Mapping[str, float] = field(default_factory=dict)
    trends: Mapping[str, TrendClass] = field(default_factory=dict)


def referenced_parameters(formula: Formula) -> tuple[set[str], set[str]]:
    """Parameters a formula reads, split into (trend atoms, value atoms)."""
    trend_params: set[str] = set()
    value_params: set[str] = set()

    def walk(f: Formula) -> None:
        if isinstance(f, TrendIs):
            trend_params.add(f.parameter)
        elif isinstance(f, ValueIn):
            value_params.add(f.parameter)
        elif isinstance(f, (And, Or)):
            for term in f.terms:
                walk(term)
        elif isinstance(f, Not):
            walk(f.term)
        else:
            raise TypeError(f"not a formula: {f!r}")

    walk(formula)
    return trend_params, value_params


def eval_formula(formula: Formula, evaluation: Evaluation) -> bool:
    if isinstance(formula, TrendIs):
        if formula.parameter not in evaluation.trends:
            raise MissingData(f"no trend available for parameter '{formula.parameter}'")
        return evaluation.trends[formula.parameter] == formula.trend
    if isinstance(formula, ValueIn):
        if formula.parameter not in evaluation.values:
            raise MissingData(f"no value available for parameter '{formula.parameter}'")
        return formula.low <= evaluation.values[formula.parameter] <= formula.high
    if isinstance(formula, And):
        return all(eval_formula(t, evaluation) for t in formula.terms)
    if isinstance(formula, Or):
        return any(eval_formula(t, evaluation) for t in formula.terms)
    if isinstance(formula, Not):
        return not eval_formula(formula.term, evaluation)
    raise TypeError(f"not a formula: {formula!r}")


# -- scales and classifiers ----------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    id: str
    formula: Formula


@dataclass(frozen=True)
class Scale:
    """Ordered predicates with pairwise-disjoint truth domains, each inducing
    one state; predicate order and state order coincide by construction."""

    predicates: tuple[Predicate, ...]
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.predicates) != len(self.states):
            raise ValueError("scale needs one state per predicate")
        if not self.predicates:
            raise ValueError("scale cannot be empty")

    def state_for(self, predicate_id: str) -> str:
        for predicate, state in zip(self.predicates, self.states):
            if predicate.id == predicate_id:
                return state
        raise KeyError(predicate_id)


@dataclass(frozen=True)
class Classifier:
    """A root scale plus hierarchical continuations keyed by the predicate
    they refine; every continuation predicate must imply its parent, which is
    enforced dynamically during classification."""

    id: str
    root: Scale
    continuations: Mapping[str, Scale] = field(default_factory=dict)
    interval: TimeInterval = TimeInterval(0, 0)

    def __post_init__(self) -> None:
        ids = [p.id for s in self.scales() for p in s.predicates]
        if len(ids) != len(set(ids)):
            raise ValueError("predicate ids must be unique across the classifier")
        known = set(ids)
        for parent_id in self.continuations:
            if parent_id not in known:
                raise ValueError(f"continuation attached to unknown predicate '{parent_id}'")

    def scales(self) -> tuple[Scale, ...]:
        return (self.root, *self.continuations.values())

    def required_parameters(self) -> tuple[set[str], set[str]]:
        trend_params: set[str] = set()
        value_params: set[str] = set()
        for scale in self.scales():
            for predicate in scale.predicates:
                t, v = referenced_parameters(predicate.formula)
                trend_params |= t
                value_params |= v
        return trend_params, value_params


@dataclass(frozen=True)
class ClassificationMatrix:
    """One-level classification rules: rows are parameters, columns are
    object classes, each cell a formula over that parameter's dynamics.
    Syntactic sugar compiled to a single-level scale (cells of a column are
    conjoined in row order; a missing cell imposes no constraint)."""

    parameters: tuple[str, ...]
    classes: tuple[str, ...]
    cells: Mapping[tuple[str, str], Formula]

    def __post_init__(self) -> None:
        for parameter, cls in self.cells:
            if parameter not in self.parameters or cls not in self.classes:
                raise ValueError(f"cell ({parameter}, {cls}) outside declared rows/columns")


def scale_from_matrix(matrix: ClassificationMatrix) -> Scale:
    predicates = []
    for cls in matrix.classes:
        terms = tuple(
            matrix.cells[(parameter, cls)]
            for parameter in matrix.parameters
            if (parameter, cls) in matrix.cells
        )
        if not terms:
            raise ValueError(f"class '{cls}' has no cells")
        formula: Formula = terms[0] if len(terms) == 1 else And(terms)
        predicates.append(Predicate(id=cls, formula=formula))
    return Scale(predicates=tuple(predicates), states=matrix.classes)


# -- scale validation ----------------------------------------------------------

@dataclass(frozen=True)
class ScaleReport:
    """Probe-based disjointness/coverage findings for one scale."""

    breaches: tuple[tuple[int, tuple[str, ...]], ...]
    uncovered: tuple[int, ...]

    @property
    def disjoint(self) -> bool:
        return not self.breaches

    @property
    def full_coverage(self) -> bool:
        return not self.uncovered


def validate_scale(scale: Scale, probes: Sequence[Evaluation]) -> ScaleReport:
    """Flag probes satisfying two or more predicates and report coverage gaps."""
    if not probes:
        raise ValueError("need at least one probe")
    breaches = []
    uncovered = []
    for index, probe in enumerate(probes):
        satisfied = tuple(p.id for p in scale.predicates if eval_formula(p.formula, probe))
        if len(satisfied) >= 2:
            breaches.append((index, satisfied))
        elif not satisfied:
            uncovered.append(index)
    return ScaleReport(breaches=tuple(breaches), uncovered=tuple(uncovered))


# -- object classification -----------------------------------------------------

def evaluation_for(
    obj: TrackedObject,
    interval: TimeInterval,
    trend_params: Iterable[str],
    value_params: Iterable[str],
    eps: float = 0.0,
) -> Evaluation:
    """Evaluate an object's parameters over a window.

    The representative value is the last observation inside the window; the
    trend is estimated over all observations inside it (two needed).
    """
    values: dict[str, float] = {}
    trends: dict[str, TrendClass] = {}
    for parameter in sorted(set(value_params) | set(trend_params)):
        points = [
            (t, v) for t, v in obj.series.get(parameter, ()) if interval.contains(t)
        ]
        if parameter in set(value_params):
            if not points:
                raise MissingData(
                    f"object '{obj.id}': no data for parameter '{parameter}' "
                    f"in [{interval.start}, {interval.end}]"
                )
            values[parameter] = points[-1][1]
        if parameter in set(trend_params):
            if len(points) < 2:
                raise MissingData(
                    f"object '{obj.id}': trend of '{parameter}' needs two points "
                    f"in [{interval.start}, {interval.end}], got {len(points)}"
                )
            trends[parameter] = classify_series(points, eps).trend
    return Evaluation(values=values, trends=trends)


def classify_object(
    obj: TrackedObject,
    classifier: Classifier,
    interval: TimeInterval | None = None,
    eps: float = 0.0,
) -> str:
    """Place one object: the state of the deepest satisfied predicate on the
    unique root-to-leaf chain.

    Every predicate of the classifier is evaluated so scale faults are caught,
    not guessed around: two true predicates on one level, or a continuation
    predicate true without its parent, raise DisjointnessViolated.
    """
    window = interval if interval is not None else classifier.interval
    trend_params, value_params = classifier.required_parameters()
    evaluation = evaluation_for(obj, window, trend_params, value_params, eps)

    truth: dict[str, bool] = {}
    for scale in classifier.scales():
        for predicate in scale.predicates:
            truth[predicate.id] = eval_formula(predicate.formula, evaluation)

    for parent_id, scale in classifier.continuations.items():
        true_children = [p.id for p in scale.predicates if truth[p.id]]
        if true_children and not truth[parent_id]:
            raise DisjointnessViolated(
                f"object '{obj.id}': continuation predicates {true_children} hold "
                f"without their parent '{parent_id}'"
            )

    scale = classifier.root
    matched_state: str | None = None
    while True:
        true_here = [p.id for p in scale.predicates if truth[p.id]]
        if len(true_here) >= 2:
            raise DisjointnessViolated(
                f"object '{obj.id}': predicates {true_here} are simultaneously true"
            )
        if not true_here:
            if matched_state is None:
                raise NoPredicateSatisfied(
                    f"object '{obj.id}' lies outside every truth domain"
                )
            return matched_state
        matched = true_here[0]
        matched_state = scale.state_for(matched)
        if matched in classifier.continuations:
            scale = classifier.continuations[matched]
        else:
            return matched_state


def distribute(
    objects: Iterable[TrackedObject],
    classifier: Classifier,
    interval: TimeInterval | None = None,
    eps: float = 0.0,
) -> Distribution:
    """Classify a population into a disjoint distribution over states."""
    assignment: dict[str, set[str]] = {}
    for obj in sorted(objects, key=lambda o: o.id):
        try:
            state = classify_object(obj, classifier, interval, eps)
        except (MissingData, NoPredicateSatisfied, DisjointnessViolated) as exc:
            raise type(exc)(f"object '{obj.id}': {exc}") from exc
        assignment.setdefault(state, set()).add(obj.id)
    return Distribution({s: frozenset(m) for s, m in assignment.items()})


# -- counters and canonical comparison ------------------------------------------

def update_counters(
    diagram: CanonicalDiagram,
    prev: Distribution,
    next: Distribution,
    counters: ArcCounters,
    tick: int,
) -> tuple[ArcCounters, tuple[Move, ...]]:
    """Fold one snapshot transition into the counters.

    Moves along declared development or backstep arcs increment that arc's
    counter; moves with no arc are returned as anomalies (recorded, never
    rejected: reality must stay representable even against the model).
    Occupancy N_i(tick) is recorded for every state of the diagram.
    """
    arc_keys = diagram.arc_keys()
    anomalies = []
    for move in sorted(distribution_delta(prev, next), key=lambda m: m.object_id):
        if (move.src, move.dst) in arc_keys:
            counters = counters.with_increment(move.src, move.dst)
        else:
            anomalies.append(move)
    counters = counters.with_occupancy(diagram.state_ids(), next, tick)
    return counters, tuple(anomalies)


@dataclass(frozen=True)
class DivergenceEntry:
    scheduled_tick: int
    matched_tick: int
    state: str
    required: int
    actual: int

    @property
    def deviation(self) -> int:
        return self.actual - self.required


@dataclass(frozen=True)
class DivergenceReport:
    """Per scheduled tick and state: required vs actual occupancy."""

    entries: tuple[DivergenceEntry, ...]
    confirmed: bool
    first_violation_tick: int | None

    @property
    def verdict(self) -> str:
        return "CONFIRMED" if self.confirmed else "REFUTED"

    def deviations_at(self, scheduled_tick: int) -> dict[str, int]:
        return {
            e.state: e.deviation
            for e in self.entries
            if e.scheduled_tick == scheduled_tick and e.deviation != 0
        }


def compare_with_canonical(
    actual: Sequence[tuple[int, Distribution]], diagram: CanonicalDiagram
) -> DivergenceReport:
    """Compare observed distributions against the diagram's target schedule.

    Each scheduled tick is matched to the nearest actual snapshot (ties go to
    the earlier snapshot). The development hypothesis is CONFIRMED iff every
    deviation is zero, else REFUTED at the first violating scheduled tick.
    """
    if not diagram.target_schedule:
        raise EmptySchedule(f"diagram '{diagram.id}' has no target schedule")
    if not actual:
        raise MissingData("no actual snapshots to compare")

    entries = []
    confirmed = True
    first_violation: int | None = None
    for scheduled_tick, required in diagram.target_schedule:
        matched_tick, matched = min(
            actual, key=lambda snap: (abs(snap[0] - scheduled_tick), snap[0])
        )
        for state in diagram.states:
            entry = DivergenceEntry(
                scheduled_tick=scheduled_tick,
                matched_tick=matched_tick,
                state=state.id,
                required=required.count(state.id),
                actual=matched.count(state.id),
            )
            entries.append(entry)
            if entry.deviation != 0 and confirmed:
                confirmed = False
                first_violation = scheduled_tick
    return DivergenceReport(
        entries=tuple(entries), confirmed=confirmed, first_violation_tick=first_violation
    )
