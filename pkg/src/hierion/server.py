"""HTTP facade for the what-if loop: session-scoped scenario editing,
simulation, trace retrieval, forecasting, and retrospective analysis.

Sessions are in-memory and isolated from each other; within a session,
requests are serialized by a per-session lock (single writer). Responses are
pure functions of session state, so replaying a simulate request on an
unchanged draft yields an equal payload under a fresh run id.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    AmbiguousArc,
    DanglingReference,
    HierionError,
    MalformedScenario,
    ParseError,
    PipelineError,
    ValidationFailed,
)
from .model import TimeInterval
from .pipeline import retrospect
from .planning import forecast, forecast_result_to_json, initial_control_state
from .scenario import Scenario, SimulationResult, simulate
from .store import (
    ModelBundle,
    MonitoringRecord,
    MonitoringStore,
    bundle_to_json_dict,
    load_bundle,
    scenario_from_json,
)

DEFAULT_PAGE_SIZE = 500


@dataclass
class Session:
    id: str
    bundle: ModelBundle
    draft: Scenario | None = None
    runs: dict[str, SimulationResult] = field(default_factory=dict)
    run_counter: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SimulateRequest(BaseModel):
    horizon: int
    scenario: str | None = None


class ForecastRequest(BaseModel):
    partialDiagram: str
    initial: dict[str, str] | None = None
    pool: float | None = None
    rules: list[str] | None = None
    resourcePriority: bool = False


class RetrospectRequest(BaseModel):
    diagram: str
    interval: tuple[int, int]
    snapshots: list[int]
    classifier: str | None = None
    objects: list[str] | None = None
    tolerance: float = 0.0
    records: list[dict] | None = None
    store: str | None = None


def create_app(
    preloaded: ModelBundle | None = None, static_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="hierion", version="0.1.0")
    sessions: dict[str, Session] = {}

    def new_session(bundle: ModelBundle) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], bundle=bundle)
        sessions[session.id] = session
        return session

    if preloaded is not None:
        new_session(preloaded)

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    # -- error translation ------------------------------------------------------

    def error_body(code: str, exc: Exception, **extra) -> dict:
        return {"code": code, "message": str(exc), **extra}

    @app.exception_handler(ValidationFailed)
    async def _validation_failed(_, exc: ValidationFailed):
        return JSONResponse(
            status_code=422, content=error_body("ValidationFailed", exc, report=exc.report)
        )

    @app.exception_handler(MalformedScenario)
    async def _malformed(_, exc: MalformedScenario):
        return JSONResponse(
            status_code=422,
            content=error_body("MalformedScenario", exc, report=exc.problems),
        )

    @app.exception_handler(DanglingReference)
    async def _dangling(_, exc: DanglingReference):
        return JSONResponse(
            status_code=422,
            content=error_body("DanglingReference", exc, ref=exc.ref, site=exc.site),
        )

    @app.exception_handler(ParseError)
    async def _parse_error(_, exc: ParseError):
        return JSONResponse(status_code=422, content=error_body("ParseError", exc))

    @app.exception_handler(AmbiguousArc)
    async def _ambiguous(_, exc: AmbiguousArc):
        return JSONResponse(
            status_code=409,
            content=error_body("AmbiguousArc", exc, tick=exc.tick, diagram=exc.diagram),
        )

    @app.exception_handler(PipelineError)
    async def _pipeline(_, exc: PipelineError):
        return JSONResponse(
            status_code=422, content=error_body("PipelineError", exc, stage=exc.stage)
        )

    @app.exception_handler(HierionError)
    async def _hierion(_, exc: HierionError):
        return JSONResponse(
            status_code=422, content=error_body(type(exc).__name__, exc)
        )

    # -- endpoints ---------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(document: dict = Body(...)):
        bundle = load_bundle(json.dumps(document))
        session = new_session(bundle)
        return {"session": session.id, "warnings": list(bundle.warnings)}

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str):
        session = get_session(session_id)
        return bundle_to_json_dict(session.bundle)

    @app.put("/sessions/{session_id}/scenario")
    def put_scenario(session_id: str, document: dict = Body(...)):
        session = get_session(session_id)
        with session.lock:
            draft = scenario_from_json(document, session.bundle)
            session.draft = draft
        return {"valid": True, "scenario": draft.id, "problems": []}

    def resolve_scenario(session: Session, scenario_id: str | None) -> Scenario:
        if scenario_id is not None:
            if scenario_id not in session.bundle.scenarios:
                raise HTTPException(status_code=404, detail="unknown scenario")
            return session.bundle.scenarios[scenario_id]
        if session.draft is not None:
            return session.draft
        if len(session.bundle.scenarios) == 1:
            return next(iter(session.bundle.scenarios.values()))
        raise HTTPException(
            status_code=422,
            detail="no draft present; name a scenario from the bundle",
        )

    @app.post("/sessions/{session_id}/simulate")
    def run_simulation(session_id: str, request: SimulateRequest):
        session = get_session(session_id)
        with session.lock:
            scenario = resolve_scenario(session, request.scenario)
            result = simulate(scenario, horizon=request.horizon)
            session.run_counter += 1
            run_id = f"r{session.run_counter}"
            session.runs[run_id] = result
        return {
            "run": run_id,
            "scenario": scenario.id,
            "horizon": result.horizon,
            "metrics": result.metrics.to_dict(),
            "final_states": dict(sorted(result.final_states.items())),
        }

    @app.get("/sessions/{session_id}/runs/{run_id}/trace")
    def get_trace(
        session_id: str,
        run_id: str,
        diagram: str = Query(...),
        page: int = Query(0, ge=0),
        page_size: int = Query(DEFAULT_PAGE_SIZE, ge=1, le=10000),
    ):
        session = get_session(session_id)
        result = session.runs.get(run_id)
        if result is None:
            raise HTTPException(status_code=404, detail="unknown run")
        trace = result.traces.get(diagram)
        if trace is None:
            raise HTTPException(status_code=404, detail="unknown diagram")
        start = page * page_size
        entries = trace.entries[start : start + page_size]
        return {
            "diagram": diagram,
            "page": page,
            "page_size": page_size,
            "total_entries": len(trace.entries),
            "entries": [
                {"tick": e.tick, "state": e.state, "cause": e.cause.value}
                for e in entries
            ],
        }

    @app.get("/sessions/{session_id}/runs/{run_id}/events")
    def get_events(session_id: str, run_id: str):
        session = get_session(session_id)
        result = session.runs.get(run_id)
        if result is None:
            raise HTTPException(status_code=404, detail="unknown run")
        return {"events": [e.to_dict() for e in result.events]}

    @app.post("/sessions/{session_id}/forecast")
    def run_forecast(session_id: str, request: ForecastRequest):
        session = get_session(session_id)
        bundle = session.bundle
        if request.partialDiagram not in bundle.partial_diagrams:
            raise HTTPException(status_code=404, detail="unknown partial diagram")
        partial = bundle.partial_diagrams[request.partialDiagram]
        rule_ids = request.rules if request.rules is not None else sorted(bundle.rules)
        missing = [r for r in rule_ids if r not in bundle.rules]
        if missing:
            raise DanglingReference(",".join(missing), "forecast rules")
        rules = [bundle.rules[r] for r in rule_ids]
        pool = request.pool if request.pool is not None else float("inf")
        initial = initial_control_state(
            bundle.control_diagrams, pool=pool, states=request.initial
        )
        outcome = forecast(
            initial, rules, partial, resource_priority=request.resourcePriority
        )
        return {"partial_diagram": partial.id, **forecast_result_to_json(outcome)}

    @app.post("/sessions/{session_id}/retrospect")
    def run_retrospect(session_id: str, request: RetrospectRequest):
        session = get_session(session_id)
        if request.records is not None:
            store = MonitoringStore()
            for i, raw in enumerate(request.records):
                try:
                    store.insert(
                        MonitoringRecord(
                            source=str(raw.get("source", "inline")),
                            object_id=str(raw["object"]),
                            parameter=str(raw["parameter"]),
                            tick=int(raw["tick"]),
                            value=float(raw["value"]),
                        )
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise HTTPException(
                        status_code=422, detail=f"records[{i}]: {exc}"
                    ) from exc
        elif request.store is not None:
            store = MonitoringStore(request.store)
        else:
            raise HTTPException(
                status_code=422, detail="provide inline records or a store path"
            )
        report = retrospect(
            session.bundle,
            store,
            diagram_id=request.diagram,
            interval=TimeInterval(*request.interval),
            snapshots=request.snapshots,
            classifier_id=request.classifier,
            objects=request.objects,
            tolerance=request.tolerance,
        )
        return report.to_json_dict()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.responses import RedirectResponse
        from fastapi.staticfiles import StaticFiles

        app.mount("/static", StaticFiles(directory=str(static_dir), html=True), name="static")

        @app.get("/", include_in_schema=False)
        def index_redirect():
            return RedirectResponse(url="/static/")

    return app
