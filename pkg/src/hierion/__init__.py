"""Discrete modeling engine for multilevel hierarchical dynamic systems.

Turns monitoring time series into qualitative state trajectories, tracks
object populations over canonical state-development diagrams, composes
diagrams across hierarchy levels, simulates scenario-controlled development,
scores scenarios, and searches for rule sequences that realize goals.
"""

from .classify import (
    And,
    ClassificationMatrix,
    Classifier,
    DivergenceReport,
    Evaluation,
    Formula,
    Not,
    Or,
    Predicate,
    Scale,
    ScaleReport,
    TrendIs,
    ValueIn,
    classify_object,
    compare_with_canonical,
    distribute,
    scale_from_matrix,
    update_counters,
    validate_scale,
)
from .compose import (
    CompositionKind,
    CompositionSpec,
    ConsistencyResult,
    Generalization,
    ParallelFragment,
    StateBlock,
    check_consistency,
    compose,
    compose_parallel,
    compose_sequential,
    generalize,
)
from .model import (
    Arc,
    ArcCounters,
    CanonicalDiagram,
    Distribution,
    MetricTrace,
    Move,
    ParameterHierarchy,
    ParameterNode,
    State,
    StateTrace,
    StateTraceEntry,
    TimeInterval,
    TrackedObject,
    TransitionCause,
    apply_moves,
    chain_diagram,
    distribution,
    distribution_delta,
    hierarchy_from_nodes,
    validate_diagram,
)
from .pipeline import RetrospectiveReport, retrospect
from .planning import (
    ControlState,
    ElementaryRule,
    GoalNode,
    GoalRunReport,
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
from .scenario import (
    ArcRef,
    ControlDiagram,
    CoupledGroup,
    DecayArc,
    Scenario,
    ScenarioMetrics,
    ScheduleEntry,
    SimEvent,
    SimulationResult,
    SymbolDef,
    SymbolKind,
    TriggeredArc,
    evaluate_scenario,
    simulate,
    validate_control_diagram,
    validate_scenario,
)
from .store import (
    ColumnMapping,
    IngestReport,
    ModelBundle,
    MonitoringRecord,
    MonitoringStore,
    ingest_monitoring,
    load_bundle,
    read_bundle,
    save_bundle,
    write_bundle,
)
from .trend import TrendClass, TrendEstimate, classify_series, segment_series, step_estimate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
