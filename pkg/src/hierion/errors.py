"""Typed errors shared across the engine.

Every error the engine raises derives from HierionError so callers can
catch the whole family. Violation *reports* (validation findings) are data,
not exceptions; exceptions mark broken preconditions or unusable input.
"""

from __future__ import annotations


class HierionError(Exception):
    """Base class for all engine errors."""


# -- core model ---------------------------------------------------------------

class ObjectUniverseMismatch(HierionError):
    """Two distributions were expected to cover the same set of objects."""


# -- trend --------------------------------------------------------------------

class TooShortSeries(HierionError):
    """A series needs at least two points to estimate a trend."""


class NonMonotoneTicks(HierionError):
    """Series ticks must be strictly increasing."""


class BreakpointOutOfRange(HierionError):
    """A segmentation breakpoint falls outside the series tick range."""


# -- classification -----------------------------------------------------------

class NoPredicateSatisfied(HierionError):
    """An object lies outside every truth domain of a scale."""


class DisjointnessViolated(HierionError):
    """Two predicates of one scale level are true for the same object,
    or a continuation predicate holds without its parent: the scale is faulty."""


class MissingData(HierionError):
    """An object lacks the series coverage a classification needs."""


class EmptySchedule(HierionError):
    """Comparison against a canonical model needs a non-empty target schedule."""


# -- composition --------------------------------------------------------------

class IntervalOrderViolation(HierionError):
    """Sequential composition needs strictly increasing child intervals."""


class InvalidChild(HierionError):
    """A child diagram is not composable (invalid, or state ids collide)."""


class IntervalMismatch(HierionError):
    """Parallel composition needs all children on one time interval."""


class OverlappingBlocks(HierionError):
    """Generalization blocks must be pairwise disjoint tuple sets."""


class UncoveredRequiredTuple(HierionError):
    """Total coverage was demanded but some child-state tuple is unassigned."""


class OrderInconsistent(HierionError):
    """The declared block order contradicts the children's state orders."""


class UnknownStateId(HierionError):
    """A referenced state or block id does not exist in the fragment."""


# -- scenario -----------------------------------------------------------------

class MalformedScenario(HierionError):
    """Scenario failed load-time validation; carries the report lines."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class AmbiguousArc(HierionError):
    """One symbol enables two transitions from one state: a modeling fault
    the simulator refuses to resolve by guessing."""

    def __init__(self, tick: int, diagram: str, symbol: str, targets: list[str]):
        super().__init__(
            f"tick {tick}: symbol '{symbol}' enables {len(targets)} arcs "
            f"from the current state of '{diagram}': {sorted(targets)}"
        )
        self.tick = tick
        self.diagram = diagram
        self.symbol = symbol
        self.targets = sorted(targets)


# -- store / io ---------------------------------------------------------------

class ParseError(HierionError):
    """Input document is not syntactically valid."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message} ({location})" if location else message)
        self.location = location


class DanglingReference(HierionError):
    """A bundle entry references an id that is not declared."""

    def __init__(self, ref: str, site: str):
        super().__init__(f"'{ref}' referenced at {site} is not declared")
        self.ref = ref
        self.site = site


class ValidationFailed(HierionError):
    """Bundle content violates model invariants; carries the full report."""

    def __init__(self, report: list[str]):
        super().__init__("; ".join(report))
        self.report = list(report)


class UnreadableInput(HierionError):
    """Monitoring input is not readable as mapped tabular text."""


class MissingReport(HierionError):
    """An export was asked for a report file that does not exist."""


# -- pipeline -----------------------------------------------------------------

class PipelineError(HierionError):
    """A retrospective pipeline stage failed; wraps the typed cause.

    `stage` names the failing stage; the original error is `__cause__`.
    """

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.__cause__ = cause
