"""Model bundle files and the monitoring event store.

A bundle is one human-editable JSON document (schema version "hierion/1")
holding the hierarchy, classifiers, diagrams, coupled groups, rules,
scenarios, partial diagrams, and goal trees, fully cross-reference-checked
at load. Monitoring data lives in an append-only JSON-lines log replayed
into an in-memory index on open; ingestion is idempotent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Mapping

from .classify import (
    And,
    Classifier,
    Formula,
    Not,
    Or,
    Predicate,
    Scale,
    TrendIs,
    ValueIn,
)
from .errors import (
    DanglingReference,
    ParseError,
    UnreadableInput,
    ValidationFailed,
)
from .model import (
    Arc,
    CanonicalDiagram,
    Distribution,
    ParameterHierarchy,
    ParameterNode,
    State,
    TimeInterval,
    TrackedObject,
    validate_diagram,
    validate_hierarchy,
)
from .planning import (
    ElementaryRule,
    GoalNode,
    GoalTree,
    PartialDiagram,
    SupportState,
)
from .scenario import (
    ArcRef,
    ControlDiagram,
    CoupledGroup,
    Scenario,
    ScheduleEntry,
    SymbolDef,
    SymbolKind,
    TriggeredArc,
    DecayArc,
    validate_control_diagram,
    validate_scenario,
)
from .trend import TrendClass

BUNDLE_VERSION = "hierion/1"


@dataclass(frozen=True)
class ModelBundle:
    """One versioned, fully resolved model document."""

    version: str
    hierarchy: ParameterHierarchy
    classifiers: Mapping[str, Classifier] = field(default_factory=dict)
    canonical_diagrams: Mapping[str, CanonicalDiagram] = field(default_factory=dict)
    control_diagrams: Mapping[str, ControlDiagram] = field(default_factory=dict)
    coupled_groups: Mapping[str, CoupledGroup] = field(default_factory=dict)
    rules: Mapping[str, ElementaryRule] = field(default_factory=dict)
    scenarios: Mapping[str, Scenario] = field(default_factory=dict)
    partial_diagrams: Mapping[str, PartialDiagram] = field(default_factory=dict)
    goal_trees: Mapping[str, GoalTree] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


# -- key checking ---------------------------------------------------------------

class _Keys:
    """Collects unknown-field findings; strict mode raises, lenient warns."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.warnings: list[str] = []

    def check(self, obj: dict, allowed: set[str], site: str) -> None:
        unknown = sorted(set(obj) - allowed)
        if not unknown:
            return
        message = f"unknown fields at {site}: {unknown}"
        if self.strict:
            raise ValidationFailed([message])
        self.warnings.append(message)


def _require(obj: dict, key: str, site: str):
    if key not in obj:
        raise ValidationFailed([f"missing field '{key}' at {site}"])
    return obj[key]


# -- formula (de)serialization ----------------------------------------------------

def formula_to_json(formula: Formula) -> dict:
    if isinstance(formula, TrendIs):
        return {"op": "trend_is", "parameter": formula.parameter, "trend": formula.trend.value}
    if isinstance(formula, ValueIn):
        return {
            "op": "value_in",
            "parameter": formula.parameter,
            "low": formula.low,
            "high": formula.high,
        }
    if isinstance(formula, And):
        return {"op": "and", "terms": [formula_to_json(t) for t in formula.terms]}
    if isinstance(formula, Or):
        return {"op": "or", "terms": [formula_to_json(t) for t in formula.terms]}
    if isinstance(formula, Not):
        return {"op": "not", "term": formula_to_json(formula.term)}
    raise TypeError(f"not a formula: {formula!r}")


def formula_from_json(obj: dict, site: str, keys: _Keys) -> Formula:
    op = _require(obj, "op", site)
    if op == "trend_is":
        keys.check(obj, {"op", "parameter", "trend"}, site)
        trend_name = _require(obj, "trend", site)
        try:
            trend = TrendClass(trend_name)
        except ValueError:
            raise ValidationFailed([f"unknown trend class '{trend_name}' at {site}"])
        return TrendIs(_require(obj, "parameter", site), trend)
    if op == "value_in":
        keys.check(obj, {"op", "parameter", "low", "high"}, site)
        return ValueIn(
            _require(obj, "parameter", site),
            float(_require(obj, "low", site)),
            float(_require(obj, "high", site)),
        )
    if op in ("and", "or"):
        keys.check(obj, {"op", "terms"}, site)
        terms = tuple(
            formula_from_json(t, f"{site}.terms[{i}]", keys)
            for i, t in enumerate(_require(obj, "terms", site))
        )
        return And(terms) if op == "and" else Or(terms)
    if op == "not":
        keys.check(obj, {"op", "term"}, site)
        return Not(formula_from_json(_require(obj, "term", site), f"{site}.term", keys))
    raise ValidationFailed([f"unknown formula op '{op}' at {site}"])


# -- section loaders ----------------------------------------------------------------

def _load_hierarchy(obj: dict, keys: _Keys) -> ParameterHierarchy:
    keys.check(obj, {"nodes"}, "hierarchy")
    nodes = {}
    for i, node in enumerate(_require(obj, "nodes", "hierarchy")):
        site = f"hierarchy.nodes[{i}]"
        keys.check(node, {"id", "level", "polymorphic", "children"}, site)
        parsed = ParameterNode(
            id=_require(node, "id", site),
            level=int(_require(node, "level", site)),
            polymorphic=bool(node.get("polymorphic", False)),
            children=tuple(node.get("children", ())),
        )
        nodes[parsed.id] = parsed
    roots = [n.id for n in nodes.values() if n.level == 0]
    if len(roots) != 1:
        raise ValidationFailed([f"hierarchy needs exactly one level-0 root, got {roots}"])
    problems = validate_hierarchy(nodes, roots[0])
    if problems:
        raise ValidationFailed([f"hierarchy: {p}" for p in problems])
    return ParameterHierarchy(nodes=nodes, root=roots[0])


def _load_state(obj: dict, site: str, keys: _Keys) -> State:
    keys.check(obj, {"id", "rank", "level", "signature"}, site)
    signature = frozenset(
        (parameter, TrendClass(trend)) for parameter, trend in obj.get("signature", ())
    )
    return State(
        id=_require(obj, "id", site),
        rank=int(_require(obj, "rank", site)),
        level=int(obj.get("level", 0)),
        signature=signature,
    )


def _load_interval(obj: dict, site: str, keys: _Keys) -> TimeInterval:
    keys.check(obj, {"start", "end"}, site)
    return TimeInterval(int(_require(obj, "start", site)), int(_require(obj, "end", site)))


def _load_scale(obj: dict, site: str, keys: _Keys) -> Scale:
    keys.check(obj, {"predicates", "states"}, site)
    predicates = []
    for i, pred in enumerate(_require(obj, "predicates", site)):
        pred_site = f"{site}.predicates[{i}]"
        keys.check(pred, {"id", "formula"}, pred_site)
        predicates.append(
            Predicate(
                id=_require(pred, "id", pred_site),
                formula=formula_from_json(
                    _require(pred, "formula", pred_site), f"{pred_site}.formula", keys
                ),
            )
        )
    return Scale(predicates=tuple(predicates), states=tuple(_require(obj, "states", site)))


def _load_classifier(obj: dict, keys: _Keys) -> Classifier:
    site = f"classifiers[{obj.get('id', '?')}]"
    keys.check(obj, {"id", "root", "continuations", "interval"}, site)
    continuations = {
        predicate_id: _load_scale(scale, f"{site}.continuations[{predicate_id}]", keys)
        for predicate_id, scale in obj.get("continuations", {}).items()
    }
    return Classifier(
        id=_require(obj, "id", site),
        root=_load_scale(_require(obj, "root", site), f"{site}.root", keys),
        continuations=continuations,
        interval=_load_interval(
            obj.get("interval", {"start": 0, "end": 0}), f"{site}.interval", keys
        ),
    )


def _load_arc(obj: dict, site: str, keys: _Keys) -> Arc:
    keys.check(obj, {"src", "dst", "delta"}, site)
    return Arc(
        src=_require(obj, "src", site),
        dst=_require(obj, "dst", site),
        delta=int(obj.get("delta", 1)),
    )


def _load_distribution(obj: dict, site: str, keys: _Keys) -> Distribution:
    keys.check(obj, {"tick", "assignment"}, site)
    return Distribution(
        {
            state: frozenset(members)
            for state, members in _require(obj, "assignment", site).items()
        }
    )


def _load_canonical(obj: dict, keys: _Keys) -> CanonicalDiagram:
    site = f"canonical_diagrams[{obj.get('id', '?')}]"
    keys.check(
        obj,
        {"id", "states", "dev_arcs", "back_arcs", "initial", "final", "target_schedule"},
        site,
    )
    schedule = tuple(
        (int(_require(entry, "tick", f"{site}.target_schedule[{i}]")),
         _load_distribution(entry, f"{site}.target_schedule[{i}]", keys))
        for i, entry in enumerate(obj.get("target_schedule", ()))
    )
    return CanonicalDiagram(
        id=_require(obj, "id", site),
        states=tuple(
            _load_state(s, f"{site}.states[{i}]", keys)
            for i, s in enumerate(_require(obj, "states", site))
        ),
        dev_arcs=tuple(
            _load_arc(a, f"{site}.dev_arcs[{i}]", keys)
            for i, a in enumerate(obj.get("dev_arcs", ()))
        ),
        back_arcs=tuple(
            _load_arc(a, f"{site}.back_arcs[{i}]", keys)
            for i, a in enumerate(obj.get("back_arcs", ()))
        ),
        initial=_require(obj, "initial", site),
        final=_require(obj, "final", site),
        target_schedule=schedule,
    )


def _load_control(obj: dict, keys: _Keys) -> ControlDiagram:
    site = f"control_diagrams[{obj.get('id', '?')}]"
    keys.check(
        obj,
        {"id", "states", "initial", "final", "alphabet", "triggered_arcs", "decay_arcs"},
        site,
    )
    alphabet = []
    for i, sym in enumerate(obj.get("alphabet", ())):
        sym_site = f"{site}.alphabet[{i}]"
        keys.check(sym, {"id", "kind"}, sym_site)
        kind_name = _require(sym, "kind", sym_site)
        try:
            kind = SymbolKind(kind_name)
        except ValueError:
            raise ValidationFailed([f"unknown symbol kind '{kind_name}' at {sym_site}"])
        alphabet.append(SymbolDef(_require(sym, "id", sym_site), kind))
    triggered = []
    for i, arc in enumerate(obj.get("triggered_arcs", ())):
        arc_site = f"{site}.triggered_arcs[{i}]"
        keys.check(arc, {"src", "dst", "symbol", "delta"}, arc_site)
        triggered.append(
            TriggeredArc(
                src=_require(arc, "src", arc_site),
                dst=_require(arc, "dst", arc_site),
                symbol=_require(arc, "symbol", arc_site),
                delta=int(arc.get("delta", 1)),
            )
        )
    decay = []
    for i, arc in enumerate(obj.get("decay_arcs", ())):
        arc_site = f"{site}.decay_arcs[{i}]"
        keys.check(arc, {"src", "dst", "threshold"}, arc_site)
        decay.append(
            DecayArc(
                src=_require(arc, "src", arc_site),
                dst=_require(arc, "dst", arc_site),
                threshold=int(_require(arc, "threshold", arc_site)),
            )
        )
    return ControlDiagram(
        id=_require(obj, "id", site),
        states=tuple(
            _load_state(s, f"{site}.states[{i}]", keys)
            for i, s in enumerate(_require(obj, "states", site))
        ),
        initial=_require(obj, "initial", site),
        final=_require(obj, "final", site),
        alphabet=tuple(alphabet),
        triggered_arcs=tuple(triggered),
        decay_arcs=tuple(decay),
    )


def _load_arc_ref(obj: dict, site: str, keys: _Keys) -> ArcRef:
    keys.check(obj, {"diagram", "src", "dst"}, site)
    return ArcRef(
        diagram=_require(obj, "diagram", site),
        src=_require(obj, "src", site),
        dst=_require(obj, "dst", site),
    )


def _load_group(obj: dict, keys: _Keys) -> CoupledGroup:
    site = f"coupled_groups[{obj.get('id', '?')}]"
    keys.check(obj, {"id", "parent_arc", "child_arcs", "upward_policy"}, site)
    policy = obj.get("upward_policy", "all")
    if policy == "all":
        required = None
    elif isinstance(policy, dict) and set(policy) == {"at_least"}:
        required = int(policy["at_least"])
    else:
        raise ValidationFailed(
            [f"upward_policy at {site} must be \"all\" or {{\"at_least\": k}}"]
        )
    return CoupledGroup(
        id=_require(obj, "id", site),
        parent_arc=_load_arc_ref(_require(obj, "parent_arc", site), f"{site}.parent_arc", keys),
        child_arcs=tuple(
            _load_arc_ref(a, f"{site}.child_arcs[{i}]", keys)
            for i, a in enumerate(_require(obj, "child_arcs", site))
        ),
        upward_required=required,
    )


def _load_rule(obj: dict, keys: _Keys) -> ElementaryRule:
    site = f"rules[{obj.get('id', '?')}]"
    keys.check(
        obj,
        {"id", "subsystem", "source", "target", "forbidden", "action", "resources", "duration"},
        site,
    )
    return ElementaryRule(
        id=_require(obj, "id", site),
        subsystem=_require(obj, "subsystem", site),
        source=_require(obj, "source", site),
        target=_require(obj, "target", site),
        forbidden=_require(obj, "forbidden", site),
        action=_require(obj, "action", site),
        resources=float(_require(obj, "resources", site)),
        duration=int(_require(obj, "duration", site)),
    )


def _load_scenario(
    obj: dict,
    hierarchy: ParameterHierarchy,
    control: Mapping[str, ControlDiagram],
    groups: Mapping[str, CoupledGroup],
    keys: _Keys,
) -> Scenario:
    site = f"scenarios[{obj.get('id', '?')}]"
    keys.check(
        obj,
        {"id", "diagrams", "mapping", "schedule", "coupling", "lenient_coupling"},
        site,
    )
    diagrams = {}
    for diagram_id in _require(obj, "diagrams", site):
        if diagram_id not in control:
            raise DanglingReference(diagram_id, f"{site}.diagrams")
        diagrams[diagram_id] = control[diagram_id]
    coupling = []
    for group_id in obj.get("coupling", ()):
        if group_id not in groups:
            raise DanglingReference(group_id, f"{site}.coupling")
        coupling.append(groups[group_id])
    schedule = []
    for i, entry in enumerate(obj.get("schedule", ())):
        entry_site = f"{site}.schedule[{i}]"
        keys.check(entry, {"tick", "symbol", "addressee"}, entry_site)
        schedule.append(
            ScheduleEntry(
                tick=int(_require(entry, "tick", entry_site)),
                symbol=_require(entry, "symbol", entry_site),
                addressee=entry.get("addressee"),
            )
        )
    return Scenario(
        id=_require(obj, "id", site),
        diagrams=diagrams,
        hierarchy=hierarchy,
        mapping=dict(obj.get("mapping", {})),
        schedule=tuple(schedule),
        coupling=tuple(coupling),
        lenient_coupling=bool(obj.get("lenient_coupling", False)),
    )


def _load_partial(obj: dict, keys: _Keys) -> PartialDiagram:
    site = f"partial_diagrams[{obj.get('id', '?')}]"
    keys.check(obj, {"id", "support_states", "max_ticks", "max_resources"}, site)
    supports = []
    for i, entry in enumerate(_require(obj, "support_states", site)):
        entry_site = f"{site}.support_states[{i}]"
        keys.check(entry, {"diagram", "state", "deadline"}, entry_site)
        supports.append(
            SupportState(
                diagram=_require(entry, "diagram", entry_site),
                state=_require(entry, "state", entry_site),
                deadline=int(_require(entry, "deadline", entry_site)),
            )
        )
    max_ticks = obj.get("max_ticks")
    max_resources = obj.get("max_resources")
    return PartialDiagram(
        id=_require(obj, "id", site),
        support_states=tuple(supports),
        max_ticks=None if max_ticks is None else int(max_ticks),
        max_resources=None if max_resources is None else float(max_resources),
    )


def _load_goal_tree(obj: dict, rules: Mapping[str, ElementaryRule], keys: _Keys) -> GoalTree:
    site = f"goal_trees[{obj.get('id', '?')}]"
    keys.check(obj, {"id", "root"}, site)

    def load_node(node: dict, node_site: str) -> GoalNode:
        keys.check(node, {"id", "children", "rule"}, node_site)
        rule_id = node.get("rule")
        rule = None
        if rule_id is not None:
            if rule_id not in rules:
                raise DanglingReference(rule_id, f"{node_site}.rule")
            rule = rules[rule_id]
        children = tuple(
            load_node(child, f"{node_site}.children[{i}]")
            for i, child in enumerate(node.get("children", ()))
        )
        return GoalNode(id=_require(node, "id", node_site), children=children, rule=rule)

    return GoalTree(
        id=_require(obj, "id", site),
        root=load_node(_require(obj, "root", site), f"{site}.root"),
    )


def load_bundle(document: str, strict: bool = True) -> ModelBundle:
    """Parse, cross-reference-check, and validate one bundle document.

    Raises ParseError for malformed JSON, DanglingReference for unresolved
    ids, and ValidationFailed carrying the full report when any module-level
    validator rejects the content.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise ParseError("bundle document must be a JSON object")

    keys = _Keys(strict)
    keys.check(
        raw,
        {
            "version",
            "hierarchy",
            "classifiers",
            "canonical_diagrams",
            "control_diagrams",
            "coupled_groups",
            "rules",
            "scenarios",
            "partial_diagrams",
            "goal_trees",
        },
        "bundle",
    )
    version = _require(raw, "version", "bundle")
    if version != BUNDLE_VERSION:
        raise ValidationFailed(
            [f"unsupported bundle version '{version}', expected '{BUNDLE_VERSION}'"]
        )

    hierarchy = _load_hierarchy(_require(raw, "hierarchy", "bundle"), keys)

    try:
        classifiers = {c["id"]: _load_classifier(c, keys) for c in raw.get("classifiers", ())}
        canonical = {d["id"]: _load_canonical(d, keys) for d in raw.get("canonical_diagrams", ())}
        control = {d["id"]: _load_control(d, keys) for d in raw.get("control_diagrams", ())}
        groups = {g["id"]: _load_group(g, keys) for g in raw.get("coupled_groups", ())}
        rules = {r["id"]: _load_rule(r, keys) for r in raw.get("rules", ())}
        scenarios = {
            s["id"]: _load_scenario(s, hierarchy, control, groups, keys)
            for s in raw.get("scenarios", ())
        }
        partials = {p["id"]: _load_partial(p, keys) for p in raw.get("partial_diagrams", ())}
        goal_trees = {
            g["id"]: _load_goal_tree(g, rules, keys) for g in raw.get("goal_trees", ())
        }
    except ValueError as exc:
        raise ValidationFailed([str(exc)]) from exc

    report: list[str] = []
    parameters = set(hierarchy.nodes)
    for classifier in classifiers.values():
        trend_params, value_params = classifier.required_parameters()
        for parameter in sorted((trend_params | value_params) - parameters):
            raise DanglingReference(parameter, f"classifiers[{classifier.id}] formula")
    for diagram in canonical.values():
        report.extend(f"canonical '{diagram.id}': {p}" for p in validate_diagram(diagram))
    for diagram in control.values():
        report.extend(
            f"control '{diagram.id}': {p}" for p in validate_control_diagram(diagram)
        )
    for group in groups.values():
        for ref in (group.parent_arc, *group.child_arcs):
            if ref.diagram not in control:
                raise DanglingReference(ref.diagram, f"coupled_groups[{group.id}]")
    for partial in partials.values():
        for support in partial.support_states:
            if support.diagram not in control:
                raise DanglingReference(
                    support.diagram, f"partial_diagrams[{partial.id}].support_states"
                )
            if all(s.id != support.state for s in control[support.diagram].states):
                raise DanglingReference(
                    support.state, f"partial_diagrams[{partial.id}].support_states"
                )
    for rule in rules.values():
        if rule.subsystem not in control:
            raise DanglingReference(rule.subsystem, f"rules[{rule.id}].subsystem")
    for scenario in scenarios.values():
        report.extend(
            f"scenario '{scenario.id}': {p}" for p in validate_scenario(scenario)
        )
    if report:
        raise ValidationFailed(report)

    return ModelBundle(
        version=version,
        hierarchy=hierarchy,
        classifiers=classifiers,
        canonical_diagrams=canonical,
        control_diagrams=control,
        coupled_groups=groups,
        rules=rules,
        scenarios=scenarios,
        partial_diagrams=partials,
        goal_trees=goal_trees,
        warnings=tuple(keys.warnings),
    )


# -- serialization -----------------------------------------------------------------

def _state_to_json(state: State) -> dict:
    out: dict = {"id": state.id, "rank": state.rank, "level": state.level}
    if state.signature:
        out["signature"] = sorted([p, t.value] for p, t in state.signature)
    return out


def _scale_to_json(scale: Scale) -> dict:
    return {
        "predicates": [
            {"id": p.id, "formula": formula_to_json(p.formula)} for p in scale.predicates
        ],
        "states": list(scale.states),
    }


def bundle_to_json_dict(bundle: ModelBundle) -> dict:
    """Normalized plain-dict form of a bundle (deterministic ordering)."""
    return {
        "version": bundle.version,
        "hierarchy": {
            "nodes": [
                {
                    "id": n.id,
                    "level": n.level,
                    "polymorphic": n.polymorphic,
                    "children": list(n.children),
                }
                for n in sorted(bundle.hierarchy.nodes.values(), key=lambda n: (n.level, n.id))
            ]
        },
        "classifiers": [
            {
                "id": c.id,
                "root": _scale_to_json(c.root),
                "continuations": {
                    pid: _scale_to_json(s) for pid, s in sorted(c.continuations.items())
                },
                "interval": {"start": c.interval.start, "end": c.interval.end},
            }
            for c in sorted(bundle.classifiers.values(), key=lambda c: c.id)
        ],
        "canonical_diagrams": [
            {
                "id": d.id,
                "states": [_state_to_json(s) for s in d.states],
                "dev_arcs": [
                    {"src": a.src, "dst": a.dst, "delta": a.delta} for a in d.dev_arcs
                ],
                "back_arcs": [
                    {"src": a.src, "dst": a.dst, "delta": a.delta} for a in d.back_arcs
                ],
                "initial": d.initial,
                "final": d.final,
                "target_schedule": [
                    {
                        "tick": tick,
                        "assignment": {
                            state: sorted(members)
                            for state, members in sorted(dist.assignment.items())
                        },
                    }
                    for tick, dist in d.target_schedule
                ],
            }
            for d in sorted(bundle.canonical_diagrams.values(), key=lambda d: d.id)
        ],
        "control_diagrams": [
            {
                "id": d.id,
                "states": [_state_to_json(s) for s in d.states],
                "initial": d.initial,
                "final": d.final,
                "alphabet": [{"id": s.id, "kind": s.kind.value} for s in d.alphabet],
                "triggered_arcs": [
                    {"src": a.src, "dst": a.dst, "symbol": a.symbol, "delta": a.delta}
                    for a in d.triggered_arcs
                ],
                "decay_arcs": [
                    {"src": a.src, "dst": a.dst, "threshold": a.threshold}
                    for a in d.decay_arcs
                ],
            }
            for d in sorted(bundle.control_diagrams.values(), key=lambda d: d.id)
        ],
        "coupled_groups": [
            {
                "id": g.id,
                "parent_arc": {
                    "diagram": g.parent_arc.diagram,
                    "src": g.parent_arc.src,
                    "dst": g.parent_arc.dst,
                },
                "child_arcs": [
                    {"diagram": r.diagram, "src": r.src, "dst": r.dst} for r in g.child_arcs
                ],
                "upward_policy": "all"
                if g.upward_required is None
                else {"at_least": g.upward_required},
            }
            for g in sorted(bundle.coupled_groups.values(), key=lambda g: g.id)
        ],
        "rules": [
            {
                "id": r.id,
                "subsystem": r.subsystem,
                "source": r.source,
                "target": r.target,
                "forbidden": r.forbidden,
                "action": r.action,
                "resources": r.resources,
                "duration": r.duration,
            }
            for r in sorted(bundle.rules.values(), key=lambda r: r.id)
        ],
        "scenarios": [
            {
                "id": s.id,
                "diagrams": list(s.diagrams),
                "mapping": dict(sorted(s.mapping.items())),
                "schedule": [
                    {
                        "tick": e.tick,
                        "symbol": e.symbol,
                        **({"addressee": e.addressee} if e.addressee is not None else {}),
                    }
                    for e in s.schedule
                ],
                "coupling": [g.id for g in s.coupling],
                "lenient_coupling": s.lenient_coupling,
            }
            for s in sorted(bundle.scenarios.values(), key=lambda s: s.id)
        ],
        "partial_diagrams": [
            {
                "id": p.id,
                "support_states": [
                    {"diagram": ss.diagram, "state": ss.state, "deadline": ss.deadline}
                    for ss in p.support_states
                ],
                **({"max_ticks": p.max_ticks} if p.max_ticks is not None else {}),
                **(
                    {"max_resources": p.max_resources}
                    if p.max_resources is not None
                    else {}
                ),
            }
            for p in sorted(bundle.partial_diagrams.values(), key=lambda p: p.id)
        ],
        "goal_trees": [
            {"id": t.id, "root": _goal_node_to_json(t.root)}
            for t in sorted(bundle.goal_trees.values(), key=lambda t: t.id)
        ],
    }


def _goal_node_to_json(node: GoalNode) -> dict:
    out: dict = {"id": node.id}
    if node.rule is not None:
        out["rule"] = node.rule.id
    if node.children:
        out["children"] = [_goal_node_to_json(c) for c in node.children]
    return out


def save_bundle(bundle: ModelBundle) -> str:
    return json.dumps(bundle_to_json_dict(bundle), indent=2, sort_keys=True) + "\n"


def scenario_from_json(obj: dict, bundle: ModelBundle, strict: bool = True) -> Scenario:
    """Resolve one scenario document against an already-loaded bundle.

    Used for scenario drafts sent over the API; raises the same typed errors
    as load_bundle and runs the scenario validator.
    """
    keys = _Keys(strict)
    try:
        scenario = _load_scenario(
            obj, bundle.hierarchy, bundle.control_diagrams, bundle.coupled_groups, keys
        )
    except ValueError as exc:
        raise ValidationFailed([str(exc)]) from exc
    problems = validate_scenario(scenario)
    if problems:
        raise ValidationFailed([f"scenario '{scenario.id}': {p}" for p in problems])
    return scenario


def read_bundle(path: str | Path, strict: bool = True) -> ModelBundle:
    return load_bundle(Path(path).read_text(encoding="utf-8"), strict=strict)


def write_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(save_bundle(bundle), encoding="utf-8")


# -- monitoring store ---------------------------------------------------------------

@dataclass(frozen=True)
class MonitoringRecord:
    source: str
    object_id: str
    parameter: str
    tick: int
    value: float

    def key(self) -> tuple[str, str, str, int]:
        return (self.source, self.object_id, self.parameter, self.tick)


@dataclass(frozen=True)
class ColumnMapping:
    """Names of the CSV columns holding each record field."""

    source: str = "source"
    object_id: str = "object"
    parameter: str = "parameter"
    tick: str = "tick"
    value: str = "value"

    def required(self) -> tuple[str, ...]:
        return (self.source, self.object_id, self.parameter, self.tick, self.value)


@dataclass(frozen=True)
class IngestReport:
    ingested: int
    duplicates: int
    rejects: tuple[tuple[int, str], ...]

    def to_dict(self) -> dict:
        return {
            "ingested": self.ingested,
            "duplicates": self.duplicates,
            "rejects": [{"row": row, "reason": reason} for row, reason in self.rejects],
        }


class MonitoringStore:
    """Append-only monitoring event store.

    The log file holds one JSON record per line; the in-memory index is
    rebuilt on open. Single writer, idempotent ingestion (duplicate
    (source, object, parameter, tick) keys are skipped and counted).
    A store opened with path=None lives purely in memory.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = None if path is None else Path(path)
        self._records: dict[tuple[str, str, str, int], MonitoringRecord] = {}
        if self.path is not None and self.path.exists():
            for line_number, line in enumerate(
                self.path.read_text(encoding="utf-8").splitlines(), start=1
            ):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    record = MonitoringRecord(
                        source=raw["source"],
                        object_id=raw["object"],
                        parameter=raw["parameter"],
                        tick=int(raw["tick"]),
                        value=float(raw["value"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise UnreadableInput(
                        f"{self.path}:{line_number}: bad store line ({exc})"
                    ) from exc
                self._records.setdefault(record.key(), record)

    def __len__(self) -> int:
        return len(self._records)

    def insert(self, record: MonitoringRecord) -> bool:
        """Add one record; False when its key is already present."""
        if record.key() in self._records:
            return False
        self._records[record.key()] = record
        if self.path is not None:
            self._append(record)
        return True

    def _append(self, record: MonitoringRecord) -> None:
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(
                json.dumps(
                    {
                        "source": record.source,
                        "object": record.object_id,
                        "parameter": record.parameter,
                        "tick": record.tick,
                        "value": record.value,
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    def ingest(self, rows: str, mapping: ColumnMapping | None = None) -> IngestReport:
        """Ingest CSV text (header row required); see ingest_monitoring."""
        mapping = mapping or ColumnMapping()
        try:
            reader = csv.DictReader(StringIO(rows))
            header = reader.fieldnames
        except csv.Error as exc:
            raise UnreadableInput(f"not parseable as CSV: {exc}") from exc
        if header is None:
            raise UnreadableInput("input has no header row")
        missing = [c for c in mapping.required() if c not in header]
        if missing:
            raise UnreadableInput(f"header lacks mapped columns: {missing}")

        ingested = 0
        duplicates = 0
        rejects: list[tuple[int, str]] = []
        # data rows are numbered from 2: the header is row 1
        for row_number, row in enumerate(reader, start=2):
            problems = []
            for column in mapping.required():
                if row.get(column) in (None, ""):
                    problems.append(f"empty column '{column}'")
            tick = value = None
            if not problems:
                try:
                    tick = int(row[mapping.tick])
                    if tick < 0:
                        problems.append(f"negative tick {tick}")
                except ValueError:
                    problems.append(f"tick '{row[mapping.tick]}' is not an integer")
                try:
                    value = float(row[mapping.value])
                except ValueError:
                    problems.append(f"value '{row[mapping.value]}' is not a number")
            if problems:
                rejects.append((row_number, "; ".join(problems)))
                continue
            record = MonitoringRecord(
                source=row[mapping.source],
                object_id=row[mapping.object_id],
                parameter=row[mapping.parameter],
                tick=tick,
                value=value,
            )
            if self.insert(record):
                ingested += 1
            else:
                duplicates += 1
        return IngestReport(
            ingested=ingested, duplicates=duplicates, rejects=tuple(rejects)
        )

    def query_series(
        self,
        object_id: str,
        parameter: str,
        interval: TimeInterval | None = None,
        source: str | None = None,
    ) -> list[tuple[int, float]]:
        """Stored points for one object's parameter, strictly tick-sorted.

        Sources are merged; when two sources carry the same tick, the later
        ingested record wins.
        """
        by_tick: dict[int, float] = {}
        for record in self._records.values():
            if record.object_id != object_id or record.parameter != parameter:
                continue
            if source is not None and record.source != source:
                continue
            if interval is not None and not interval.contains(record.tick):
                continue
            by_tick[record.tick] = record.value
        return sorted(by_tick.items())

    def object_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.object_id for r in self._records.values()}))

    def parameters_of(self, object_id: str) -> tuple[str, ...]:
        return tuple(
            sorted(
                {
                    r.parameter
                    for r in self._records.values()
                    if r.object_id == object_id
                }
            )
        )

    def tracked_object(self, object_id: str, level: int = 0) -> TrackedObject:
        """Materialize one object's full series from the store."""
        series = {
            parameter: tuple(self.query_series(object_id, parameter))
            for parameter in self.parameters_of(object_id)
        }
        return TrackedObject(id=object_id, level=level, series=series)


def ingest_monitoring(
    store: MonitoringStore, rows: str, mapping: ColumnMapping | None = None
) -> IngestReport:
    """Append tabular monitoring rows to the store idempotently.

    Valid rows are stored; duplicates (by source/object/parameter/tick) are
    skipped and counted; rejects carry the 1-based row number (the header is
    row 1) and the reason.
    """
    return store.ingest(rows, mapping)
