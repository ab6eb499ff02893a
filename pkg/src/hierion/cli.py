"""Command-line surface for the directive-planning pipeline.

    hierion ingest      append monitoring CSV rows to the event store
    hierion retrospect  replay stored data against a canonical diagram
    hierion simulate    run a scenario and write traces, events, metrics
    hierion forecast    search for a rule sequence realizing a partial diagram
    hierion evaluate    recompute scenario metrics from a written run
    hierion export      turn reports into plot-ready tabular files
    hierion serve       start the HTTP API

Every command is deterministic: identical inputs produce byte-identical
payload files. Timestamps live only in manifest.json, written next to the
payloads of each command that takes --out.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    AmbiguousArc,
    DanglingReference,
    HierionError,
    MissingReport,
    UnreadableInput,
)
from .model import TimeInterval
from .pipeline import RetrospectiveReport, retrospect
from .planning import (
    check_partial_diagram,
    forecast,
    forecast_result_to_json,
    initial_control_state,
)
from .scenario import SimulationResult, evaluate_scenario, simulate
from .store import (
    ColumnMapping,
    ModelBundle,
    MonitoringStore,
    ingest_monitoring,
    read_bundle,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

STORE_ENV_VAR = "HIERION_STORE"


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_payload(out_dir: Path, name: str, payload: dict, written: list[str]) -> None:
    path = out_dir / name
    path.write_text(_dump(payload), encoding="utf-8")
    written.append(name)


def _write_csv(out_dir: Path, name: str, header: list[str], rows: list[list], written: list[str]) -> None:
    path = out_dir / name
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    written.append(name)


def _write_manifest(out_dir: Path, command: str, args: dict, written: list[str]) -> None:
    recorded = {
        k: v
        for k, v in sorted(args.items())
        if k not in ("handler", "command")
        and v is not None
        and isinstance(v, (str, int, float, bool))
    }
    manifest = {
        "command": command,
        "arguments": recorded,
        "outputs": sorted(written),
        "determinism": "engine is seedless; payload files carry no timestamps",
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(_dump(manifest), encoding="utf-8")


def _store_path(value: str | None) -> Path:
    if value is not None:
        return Path(value)
    env = os.environ.get(STORE_ENV_VAR)
    if env:
        return Path(env)
    raise UnreadableInput(f"no store path: pass --store or set {STORE_ENV_VAR}")


def _load_bundle_file(path: str, strict: bool = True) -> ModelBundle:
    return read_bundle(path, strict=strict)


def _parse_interval(text: str) -> TimeInterval:
    start, _, end = text.partition(":")
    return TimeInterval(int(start), int(end))


def _parse_ticks(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part != ""]


def _parse_assignments(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    out = {}
    for piece in text.split(","):
        key, _, value = piece.partition("=")
        if not key or not value:
            raise UnreadableInput(f"bad assignment '{piece}', expected name=value")
        out[key] = value
    return out


# -- command handlers -----------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    store = MonitoringStore(_store_path(args.store))
    try:
        text = Path(args.csv).read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableInput(f"cannot read {args.csv}: {exc}") from exc
    mapping_overrides = _parse_assignments(args.map)
    field_names = {"source", "object", "parameter", "tick", "value"}
    unknown = set(mapping_overrides) - field_names
    if unknown:
        raise UnreadableInput(f"unknown --map fields: {sorted(unknown)}")
    mapping = ColumnMapping(
        source=mapping_overrides.get("source", "source"),
        object_id=mapping_overrides.get("object", "object"),
        parameter=mapping_overrides.get("parameter", "parameter"),
        tick=mapping_overrides.get("tick", "tick"),
        value=mapping_overrides.get("value", "value"),
    )
    report = ingest_monitoring(store, text, mapping)
    payload = {"command": "ingest", "store": str(store.path), **report.to_dict()}
    sys.stdout.write(_dump(payload))
    return EXIT_OK


def _retrospect_tables(report: RetrospectiveReport) -> tuple[list[list], list[list]]:
    occupancy_rows = [
        [tick, state, count]
        for state, samples in sorted(report.counters.occupancy.items())
        for tick, count in samples
    ]
    occupancy_rows.sort(key=lambda r: (r[0], r[1]))
    arc_rows = [
        [tick, src, dst, count]
        for tick, counts in report.arc_history
        for src, dst, count in counts
    ]
    return occupancy_rows, arc_rows


def cmd_retrospect(args: argparse.Namespace) -> int:
    bundle = _load_bundle_file(args.bundle)
    store = MonitoringStore(_store_path(args.store))
    report = retrospect(
        bundle,
        store,
        diagram_id=args.diagram,
        interval=_parse_interval(args.interval),
        snapshots=_parse_ticks(args.snapshots),
        classifier_id=args.classifier,
        objects=args.objects.split(",") if args.objects else None,
        tolerance=args.tolerance,
    )
    payload = report.to_json_dict()
    sys.stdout.write(_dump({"verdict": report.verdict, "diagram": report.diagram}))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    _write_payload(out_dir, "report.json", payload, written)
    occupancy_rows, arc_rows = _retrospect_tables(report)
    _write_csv(out_dir, "occupancy.csv", ["tick", "state", "count"], occupancy_rows, written)
    _write_csv(out_dir, "arc_counts.csv", ["tick", "src", "dst", "count"], arc_rows, written)
    _write_manifest(out_dir, "retrospect", vars(args), written)
    return EXIT_OK


def _trace_payload(result: SimulationResult, diagram_id: str) -> dict:
    trace = result.traces[diagram_id]
    return {
        "diagram": diagram_id,
        "final_state": result.final_states[diagram_id],
        "entries": [
            {"tick": e.tick, "state": e.state, "cause": e.cause.value}
            for e in trace.entries
        ],
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    bundle = _load_bundle_file(args.bundle)
    if args.scenario not in bundle.scenarios:
        raise DanglingReference(args.scenario, "simulate --scenario")
    result = simulate(bundle.scenarios[args.scenario], horizon=args.horizon)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    for diagram_id in result.traces:
        _write_payload(
            out_dir, f"trace_{diagram_id}.json", _trace_payload(result, diagram_id), written
        )
    _write_payload(
        out_dir, "events.json", {"events": [e.to_dict() for e in result.events]}, written
    )
    _write_payload(out_dir, "metrics.json", result.metrics.to_dict(), written)
    _write_payload(
        out_dir,
        "metric_trace.json",
        {
            "entries": [
                {"tick": tick, "metrics": dict(values)}
                for tick, values in result.metric_trace.entries
            ]
        },
        written,
    )
    _write_payload(
        out_dir,
        "run.json",
        {
            "scenario": args.scenario,
            "horizon": result.horizon,
            "diagrams": sorted(result.traces),
            "final_states": dict(sorted(result.final_states.items())),
        },
        written,
    )
    _write_manifest(out_dir, "simulate", vars(args), written)
    sys.stdout.write(_dump({"run": str(out_dir), "metrics": result.metrics.to_dict()}))
    return EXIT_OK


def cmd_forecast(args: argparse.Namespace) -> int:
    bundle = _load_bundle_file(args.bundle)
    if args.partial not in bundle.partial_diagrams:
        raise DanglingReference(args.partial, "forecast --partial")
    partial = bundle.partial_diagrams[args.partial]
    rule_ids = args.rules.split(",") if args.rules else sorted(bundle.rules)
    missing = [r for r in rule_ids if r not in bundle.rules]
    if missing:
        raise DanglingReference(",".join(missing), "forecast --rules")
    rules = [bundle.rules[r] for r in rule_ids]
    initial = initial_control_state(
        bundle.control_diagrams,
        pool=args.pool,
        states=_parse_assignments(args.initial) or None,
    )
    outcome = forecast(initial, rules, partial, resource_priority=args.resource_priority)
    payload = {"partial_diagram": partial.id, **forecast_result_to_json(outcome)}
    sys.stdout.write(_dump(payload))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        written: list[str] = []
        _write_payload(out_dir, "plan.json", payload, written)
        _write_manifest(out_dir, "forecast", vars(args), written)
    return EXIT_OK


def _read_run(run_dir: Path):
    """Rebuild traces, events, and finals from a simulate output directory."""
    from .model import StateTrace, StateTraceEntry, TransitionCause
    from .scenario import SimEvent

    run_file = run_dir / "run.json"
    if not run_file.exists():
        raise MissingReport(f"{run_dir} lacks run.json")
    run = json.loads(run_file.read_text(encoding="utf-8"))
    traces = {}
    for diagram_id in run["diagrams"]:
        raw = json.loads((run_dir / f"trace_{diagram_id}.json").read_text(encoding="utf-8"))
        traces[diagram_id] = StateTrace(
            diagram_id,
            tuple(
                StateTraceEntry(e["tick"], e["state"], TransitionCause(e["cause"]))
                for e in raw["entries"]
            ),
        )
    raw_events = json.loads((run_dir / "events.json").read_text(encoding="utf-8"))
    events = tuple(SimEvent(**e) for e in raw_events["events"])
    return traces, events, run["final_states"], run


def cmd_evaluate(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    traces, events, finals, _ = _read_run(run_dir)
    metrics = evaluate_scenario(traces, events, finals)
    if args.partial or args.bundle:
        if not (args.partial and args.bundle):
            raise UnreadableInput("--partial needs --bundle and vice versa")
        bundle = _load_bundle_file(args.bundle)
        if args.partial not in bundle.partial_diagrams:
            raise DanglingReference(args.partial, "evaluate --partial")
        check = check_partial_diagram(traces, bundle.partial_diagrams[args.partial])
        payload = {"metrics": metrics.to_dict(), "partial_check": {
            "verdict": check.verdict,
            "first_miss": None
            if check.first_miss is None
            else {
                "diagram": check.first_miss.diagram,
                "state": check.first_miss.state,
                "deadline": check.first_miss.deadline,
            },
            "actual_state": check.actual_state,
            "budget_violation": check.budget_violation,
        }}
    else:
        payload = {"metrics": metrics.to_dict()}
    sys.stdout.write(_dump(payload))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    source = Path(args.input)
    out_dir = Path(args.out)
    written: list[str] = []
    if source.is_file():
        report = json.loads(source.read_text(encoding="utf-8"))
        if "occupancy" not in report:
            raise MissingReport(f"{source} is not a retrospective report")
        out_dir.mkdir(parents=True, exist_ok=True)
        occupancy_rows = sorted(
            [sample[0], entry["state"], sample[1]]
            for entry in report["occupancy"]
            for sample in entry["samples"]
        )
        _write_csv(out_dir, "occupancy.csv", ["tick", "state", "count"], occupancy_rows, written)
        arc_rows = [
            [entry["tick"], c["src"], c["dst"], c["count"]]
            for entry in report.get("arc_history", ())
            for c in entry["counts"]
        ]
        _write_csv(out_dir, "arc_counts.csv", ["tick", "src", "dst", "count"], arc_rows, written)
    elif source.is_dir():
        metric_file = source / "metric_trace.json"
        if not metric_file.exists():
            raise MissingReport(f"{source} lacks metric_trace.json")
        trace = json.loads(metric_file.read_text(encoding="utf-8"))
        out_dir.mkdir(parents=True, exist_ok=True)
        columns = ["completeness", "redundancy_count", "omitted_possibilities", "complexness"]
        rows = [
            [entry["tick"], *[entry["metrics"][c] for c in columns]]
            for entry in trace["entries"]
        ]
        _write_csv(out_dir, "metric_timeline.csv", ["tick", *columns], rows, written)
    else:
        raise MissingReport(f"no report at {source}")
    _write_manifest(out_dir, "export", vars(args), written)
    sys.stdout.write(_dump({"written": sorted(written)}))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    bundle = _load_bundle_file(args.bundle) if args.bundle else None
    static_dir = args.static
    if static_dir is None and Path("frontend/dist").is_dir():
        static_dir = "frontend/dist"
    app = create_app(preloaded=bundle, static_dir=static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hierion",
        description="Discrete modeling of hierarchical dynamic systems in a control loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="append monitoring CSV rows to the store")
    ingest.add_argument("--store", help=f"event store path (default ${STORE_ENV_VAR})")
    ingest.add_argument("--csv", required=True, help="CSV file with a header row")
    ingest.add_argument(
        "--map",
        help="column mapping overrides, e.g. object=obj,tick=t",
    )
    ingest.set_defaults(handler=cmd_ingest)

    retro = sub.add_parser("retrospect", help="compare stored data with a canonical diagram")
    retro.add_argument("--bundle", required=True)
    retro.add_argument("--store", help=f"event store path (default ${STORE_ENV_VAR})")
    retro.add_argument("--diagram", required=True)
    retro.add_argument("--classifier", help="classifier id (optional if bundle has one)")
    retro.add_argument("--interval", required=True, help="analysis interval, e.g. 0:8")
    retro.add_argument("--snapshots", required=True, help="snapshot ticks, e.g. 0,4,8")
    retro.add_argument("--objects", help="restrict to these object ids (comma list)")
    retro.add_argument("--tolerance", type=float, default=0.0, help="trend flatness tolerance")
    retro.add_argument("--out", required=True, help="output directory")
    retro.set_defaults(handler=cmd_retrospect)

    sim = sub.add_parser("simulate", help="run a scenario")
    sim.add_argument("--bundle", required=True)
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--horizon", type=int, required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(handler=cmd_simulate)

    fc = sub.add_parser("forecast", help="search for a plan meeting a partial diagram")
    fc.add_argument("--bundle", required=True)
    fc.add_argument("--partial", required=True, help="partial diagram id")
    fc.add_argument("--initial", help="initial states, e.g. c1=S13,c2=S23")
    fc.add_argument("--pool", type=float, default=float("inf"), help="resource pool")
    fc.add_argument("--rules", help="rule ids to use (default: all bundle rules)")
    fc.add_argument(
        "--resource-priority",
        action="store_true",
        help="minimize resources before ticks",
    )
    fc.add_argument("--out", help="optional output directory for plan.json")
    fc.set_defaults(handler=cmd_forecast)

    ev = sub.add_parser("evaluate", help="recompute metrics from a written run")
    ev.add_argument("--run", required=True, help="simulate output directory")
    ev.add_argument("--bundle", help="bundle (for --partial checks)")
    ev.add_argument("--partial", help="partial diagram id to check the run against")
    ev.set_defaults(handler=cmd_evaluate)

    ex = sub.add_parser("export", help="write plot-ready tables from reports")
    ex.add_argument("--input", required=True, help="report.json or a run directory")
    ex.add_argument("--out", required=True, help="output directory")
    ex.set_defaults(handler=cmd_export)

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--bundle", help="preload this bundle into a session")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8421)
    serve.add_argument(
        "--static",
        help="serve this directory at /static (default: frontend/dist if present)",
    )
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (UnreadableInput, MissingReport, FileNotFoundError, OSError) as exc:
        sys.stderr.write(f"hierion: {exc}\n")
        return EXIT_IO
    except AmbiguousArc as exc:
        sys.stderr.write(f"hierion: ambiguous arc at tick {exc.tick}: {exc}\n")
        return EXIT_VALIDATION
    except HierionError as exc:
        sys.stderr.write(f"hierion: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
