"""HTTP/JSON service exposing the analysis workflow to the UI and scripts.

Sessions live in memory behind a per-session lock (single writer, snapshot
reads). Every modeled failure maps to a {code, message, detail} body; GET
handlers are pure reads and produce byte-identical responses for an
unchanged session, with reports additionally memoized on their full query
key. The report body bytes come from the same serializer the CLI uses.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .dataset import DEFAULT_DISCRETE_THRESHOLD, DEFAULT_HISTOGRAM_BINS, IngestOptions, load_csv, parse_csv
from .errors import (
    DuplicateEvent,
    IngestError,
    NoEffect,
    SchemaError,
    TempoCauseError,
    UnknownEvent,
    UnknownNode,
    UnknownSession,
    ValidationError,
)
from .estimate import EstimatorConfig
from .flowgraph import CausalFlowGraph, layout
from .formula import EffectSpec, EventDef, Window
from .reporting import dataset_summary_payload, dump_json_bytes, report_json_bytes
from .scenarios import SAMPLE_FILES, bundled_sample
from .session import AnalysisSession, series_payload

STATUS_BY_ERROR: list[tuple[type, int]] = [
    (UnknownSession, 404),
    (UnknownEvent, 404),
    (UnknownNode, 404),
    (DuplicateEvent, 409),
    (NoEffect, 409),
    (IngestError, 400),
    (SchemaError, 422),
    (TempoCauseError, 422),
]


def _status_for(exc: TempoCauseError) -> int:
    for etype, status in STATUS_BY_ERROR:
        if isinstance(exc, etype):
            return status
    return 422


@dataclass
class SessionBox:
    session: AnalysisSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    report_cache: OrderedDict = field(default_factory=OrderedDict)

    def invalidate(self) -> None:
        self.report_cache.clear()

    def cached_report_bytes(self, eps, r, s) -> bytes:
        key = json.dumps(
            {
                "causes": [ev.to_dict() for ev in self.session.causes.values()],
                "effect": self.session.effect.to_dict() if self.session.effect else None,
                "window": [r, s] if r is not None else self.session.window.to_dict(),
                "eps": eps if eps is not None else self.session.epsilon,
            },
            sort_keys=True,
        )
        if key in self.report_cache:
            return self.report_cache[key]
        body = report_json_bytes(self.session.report(eps, r, s))
        self.report_cache[key] = body
        while len(self.report_cache) > 32:
            self.report_cache.popitem(last=False)
        return body


class SessionStore:
    def __init__(self) -> None:
        self._boxes: dict[str, SessionBox] = {}
        self._lock = threading.Lock()

    def create(self, session: AnalysisSession) -> str:
        session_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._boxes[session_id] = SessionBox(session=session)
        return session_id

    def get(self, session_id: str) -> SessionBox:
        with self._lock:
            try:
                return self._boxes[session_id]
            except KeyError:
                raise UnknownSession(f"unknown session {session_id!r}") from None

    def drop(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._boxes:
                raise UnknownSession(f"unknown session {session_id!r}")
            del self._boxes[session_id]


def _optional_report(session: AnalysisSession) -> dict | None:
    if session.effect is None or not session.causes:
        return None
    return session.report().to_dict()


def create_app(data_dir: str = ".", cors_origin: str = "*") -> FastAPI:
    app = FastAPI(
        title="tempocause",
        version="0.1.0",
        description="Logic-based temporal causality: lagged significance tests, "
        "cause estimation, delay sweeps, and causal flow graphs.",
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    base_dir = Path(data_dir).resolve()

    @app.exception_handler(TempoCauseError)
    async def _domain_error(_req: Request, exc: TempoCauseError):
        return Response(
            content=dump_json_bytes(exc.to_payload()),
            status_code=_status_for(exc),
            media_type="application/json",
        )

    def ok(payload: dict, status_code: int = 200) -> Response:
        return Response(
            content=dump_json_bytes(payload),
            status_code=status_code,
            media_type="application/json",
        )

    @app.get("/health")
    def health() -> Response:
        return ok({"status": "ok"})

    @app.get("/samples")
    def samples() -> Response:
        return ok({"samples": sorted(SAMPLE_FILES)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)) -> Response:
        sources = [k for k in ("csv", "path", "sample") if body.get(k)]
        if len(sources) != 1:
            raise ValidationError("provide exactly one of 'csv', 'path', or 'sample'")
        options = IngestOptions(
            time_col=body.get("time_col"),
            discrete_cols=frozenset(body.get("discrete_cols") or ()),
            discrete_threshold=int(
                body.get("discrete_threshold", DEFAULT_DISCRETE_THRESHOLD)
            ),
            name=body.get("name"),
        )
        if sources[0] == "csv":
            ds = parse_csv(body["csv"], options, name=body.get("name") or "uploaded")
        elif sources[0] == "path":
            target = (base_dir / body["path"]).resolve()
            if not target.is_relative_to(base_dir):
                raise ValidationError(f"path {body['path']!r} escapes the data directory")
            ds = load_csv(target, options)
        else:
            ds = bundled_sample(body["sample"])
        session = AnalysisSession(dataset=ds)
        session_id = store.create(session)
        return ok(
            {"session_id": session_id, "summary": dataset_summary_payload(ds)},
            status_code=201,
        )

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> Response:
        box = store.get(session_id)
        return ok(
            {
                "session_id": session_id,
                "state": box.session.state_dict(),
                "summary": dataset_summary_payload(box.session.dataset),
            }
        )

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str) -> Response:
        store.drop(session_id)
        return ok({"deleted": session_id})

    @app.put("/sessions/{session_id}/effect")
    def put_effect(session_id: str, body: dict = Body(...)) -> Response:
        box = store.get(session_id)
        with box.lock:
            box.session.set_effect(EffectSpec.from_dict(body))
            box.invalidate()
            return ok({"state": box.session.state_dict(), "report": _optional_report(box.session)})

    @app.patch("/sessions/{session_id}")
    def patch_session(session_id: str, body: dict = Body(...)) -> Response:
        box = store.get(session_id)
        with box.lock:
            if "window" in body:
                box.session.set_window(Window(int(body["window"]["r"]), int(body["window"]["s"])))
            if "epsilon" in body:
                box.session.set_epsilon(float(body["epsilon"]))
            box.invalidate()
            return ok({"state": box.session.state_dict(), "report": _optional_report(box.session)})

    @app.post("/sessions/{session_id}/causes", status_code=201)
    def post_cause(session_id: str, body: dict = Body(...)) -> Response:
        box = store.get(session_id)
        with box.lock:
            box.session.add_cause(EventDef.from_dict(body))
            box.invalidate()
            return ok(
                {"state": box.session.state_dict(), "report": _optional_report(box.session)},
                status_code=201,
            )

    @app.delete("/sessions/{session_id}/causes/{event_id}")
    def delete_cause(session_id: str, event_id: str) -> Response:
        box = store.get(session_id)
        with box.lock:
            box.session.remove_cause(event_id)
            box.invalidate()
            return ok({"state": box.session.state_dict(), "report": _optional_report(box.session)})

    @app.get("/sessions/{session_id}/conditional")
    def get_conditional(
        session_id: str,
        cause: str = Query(...),
        delay: int = Query(...),
        bins: int = Query(DEFAULT_HISTOGRAM_BINS),
    ) -> Response:
        box = store.get(session_id)
        session = box.session
        if cause in session.causes:
            event = session.causes[cause]
        else:
            try:
                event = EventDef.from_dict(json.loads(cause))
            except json.JSONDecodeError:
                raise UnknownEvent(
                    f"cause {cause!r} is neither a session event id nor an inline event JSON"
                ) from None
        return ok(session.conditional(event, delay, bins))

    @app.get("/sessions/{session_id}/report")
    def get_report(
        session_id: str,
        eps: float | None = Query(None),
        r: int | None = Query(None),
        s: int | None = Query(None),
    ) -> Response:
        box = store.get(session_id)
        with box.lock:
            body = box.cached_report_bytes(eps, r, s)
        return Response(content=body, media_type="application/json")

    @app.get("/sessions/{session_id}/sweep")
    def get_sweep(
        session_id: str,
        max_delay: int = Query(..., alias="max"),
        eps: float | None = Query(None),
        r: int | None = Query(None),
        s: int | None = Query(None),
    ) -> Response:
        box = store.get(session_id)
        profile = box.session.sweep(max_delay, eps, r, s)
        return ok(profile.to_dict())

    @app.get("/sessions/{session_id}/series")
    def get_series(session_id: str) -> Response:
        box = store.get(session_id)
        return ok(series_payload(box.session))

    @app.post("/sessions/{session_id}/estimate")
    def post_estimate(session_id: str, body: dict = Body(default={})) -> Response:
        box = store.get(session_id)
        with box.lock:
            cfg = EstimatorConfig(
                theta_fraction=float(body.get("theta_fraction", 0.15)),
                max_iterations=int(body.get("max_iterations", 5)),
                min_cluster_mass=(
                    int(body["min_cluster_mass"])
                    if body.get("min_cluster_mass") is not None
                    else None
                ),
            )
            result, previous = box.session.estimate(
                cfg, exclude=set(body.get("exclude") or ())
            )
            box.invalidate()
            return ok(
                {
                    "estimated": result.to_dict(),
                    "previous_causes": [ev.to_dict() for ev in previous],
                    "state": box.session.state_dict(),
                    "report": _optional_report(box.session),
                }
            )

    @app.post("/sessions/{session_id}/flow/save")
    def post_flow_save(session_id: str) -> Response:
        box = store.get(session_id)
        with box.lock:
            diff = box.session.save_flow()
            graph = box.session.flow
            return ok({"diff": diff, "graph": graph.to_dict(), "layout": layout(graph)})

    @app.get("/sessions/{session_id}/flow")
    def get_flow(session_id: str) -> Response:
        box = store.get(session_id)
        graph = box.session.flow
        return ok({"graph": graph.to_dict(), "layout": layout(graph)})

    @app.post("/sessions/{session_id}/flow/load")
    def post_flow_load(session_id: str, body: dict = Body(...)) -> Response:
        box = store.get(session_id)
        with box.lock:
            graph = CausalFlowGraph.from_dict(body.get("graph", body))
            warnings = box.session.load_flow(graph)
            return ok(
                {"graph": graph.to_dict(), "layout": layout(graph), "warnings": warnings}
            )

    @app.post("/sessions/{session_id}/flow/node/{node_id}/reload")
    def post_flow_reload(
        session_id: str, node_id: str, role: str = Query(...)
    ) -> Response:
        box = store.get(session_id)
        with box.lock:
            payload = box.session.reload_node(node_id, role)
            box.invalidate()
            return ok(
                {
                    "applied": payload,
                    "state": box.session.state_dict(),
                    "report": _optional_report(box.session),
                }
            )

    @app.delete("/sessions/{session_id}/flow/node/{node_id}")
    def delete_flow_node(session_id: str, node_id: str) -> Response:
        box = store.get(session_id)
        with box.lock:
            diff = box.session.flow.delete_node(node_id)
            graph = box.session.flow
            return ok({"diff": diff, "graph": graph.to_dict(), "layout": layout(graph)})

    return app
