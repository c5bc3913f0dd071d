"""Stateless HTTP JSON API over a workspace snapshot.

The workspace is loaded once and treated as immutable for the life of the
process, so every handler is a pure function of the request and identical
requests always produce identical responses. The dashboard consumes this
API; it never does risk arithmetic of its own.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from ragrisk.catalog import Workspace, load_workspace
from ragrisk.engine import assess
from ragrisk.flows import (
    UnknownActorError,
    actor_path,
    build_surface_graph,
    export_dot,
)
from ragrisk.model import ActorClass, FlowStep, crossing_flows
from ragrisk.pyramid import coverage_matrix, prioritize
from ragrisk.report import assessment_payload, coverage_payload, priority_payload

API_PREFIX = "/api/v1"

# The full, fixed set of error codes this API can emit.
CODE_PARSE = "PARSE"
CODE_SCHEMA = "SCHEMA"
CODE_VALIDATION = "VALIDATION"
CODE_UNKNOWN_ID = "UNKNOWN_ID"
CODE_BAD_REQUEST = "BAD_REQUEST"


class ApiError(Exception):
    def __init__(
        self, status: int, code: str, message: str, path: str | None = None
    ):
        self.status = status
        self.code = code
        self.message = message
        self.path = path
        super().__init__(message)


class _JSONResponse(JSONResponse):
    media_type = "application/json; charset=utf-8"


class AssessRequest(BaseModel):
    controls: list[str]


def _error_response(
    status: int, code: str, message: str, path: str | None = None
) -> _JSONResponse:
    body: dict[str, Any] = {"error": {"code": code, "message": message}}
    if path:
        body["error"]["path"] = path
    return _JSONResponse(body, status_code=status)


def _technique_payload(technique) -> dict[str, Any]:
    return {
        "framework": technique.framework.value,
        "technique_id": technique.technique_id,
        "name": technique.name,
    }


def _step_payload(step: FlowStep, skipped: bool) -> dict[str, Any]:
    return {
        "index": step.index,
        "stage": step.stage,
        "technique": _technique_payload(step.technique) if step.technique else None,
        "target": step.target,
        "skipped": skipped,
    }


def _workspace_payload(ws: Workspace) -> dict[str, Any]:
    return {
        "title": ws.meta.title,
        "schema_version": ws.meta.schema_version,
        "model": {
            "id": ws.model.id,
            "name": ws.model.name,
            "components": [
                {
                    "id": c.id,
                    "name": c.name,
                    "kind": c.kind.value,
                    "exposure": c.exposure.value,
                }
                for c in ws.model.components
            ],
            "data_flows": [
                {
                    "id": f.id,
                    "from": f.source,
                    "to": f.target,
                    "data_kind": f.data_kind,
                    "loopback": f.loopback,
                }
                for f in ws.model.data_flows
            ],
            "trust_boundaries": [
                {"id": b.id, "name": b.name, "members": list(b.members)}
                for b in ws.model.trust_boundaries
            ],
            "crossing_flows": crossing_flows(ws.model),
        },
        "threats": [
            {
                "id": t.id,
                "name": t.name,
                "targets": list(t.targets),
                "techniques": [_technique_payload(ref) for ref in t.techniques],
                "weaknesses": [
                    {"cwe_id": w.cwe_id, "title": w.title, "note": w.note}
                    for w in t.weaknesses
                ],
                "flows": [
                    {
                        "id": flow.id,
                        "step_count": len(flow.steps),
                        "actors": sorted(
                            actor.value for actor in flow.entry_points
                        ),
                    }
                    for flow in t.flows
                ],
            }
            for t in ws.threats
        ],
        "controls": [
            {
                "id": c.id,
                "name": c.name,
                "description": c.description,
                "layers": [layer.value for layer in c.layers],
                "adjustments": [
                    {"factor": a.factor, "delta": a.delta} for a in c.adjustments
                ],
            }
            for c in ws.controls
        ],
    }


def create_app(
    ws: Workspace,
    allow_origin: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Bundle an immutable workspace snapshot into an ASGI application."""
    app = FastAPI(
        title="ragrisk",
        default_response_class=_JSONResponse,
        docs_url=None,
        redoc_url=None,
        openapi_url=None,
    )

    if allow_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    # Everything derivable from the snapshot alone is computed once here.
    workspace_payload = _workspace_payload(ws)
    control_names = {c.id: c.name for c in ws.controls}
    pyramid_payload = {
        "priorities": [
            priority_payload(p, control_names)
            for p in prioritize(list(ws.controls), list(ws.threats))
        ],
        "coverage": coverage_payload(
            coverage_matrix(list(ws.controls)), control_names
        ),
    }
    dot_text = export_dot(build_surface_graph(ws))

    @app.exception_handler(ApiError)
    async def _on_api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message, exc.path)

    @app.exception_handler(StarletteHTTPException)
    async def _on_http_error(request: Request, exc: StarletteHTTPException):
        return _error_response(exc.status_code, CODE_BAD_REQUEST, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return _error_response(422, CODE_BAD_REQUEST, str(exc.errors()))

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz() -> str:
        return "ok"

    @app.get(f"{API_PREFIX}/workspace")
    async def get_workspace():
        return workspace_payload

    @app.post(f"{API_PREFIX}/assess")
    async def post_assess(body: AssessRequest):
        known = set(ws.control_ids())
        unknown = sorted(set(body.controls) - known)
        if unknown:
            raise ApiError(
                422,
                CODE_UNKNOWN_ID,
                "unknown control id(s): " + ", ".join(unknown),
            )
        wanted = set(body.controls)
        selection = [c for c in ws.controls if c.id in wanted]
        return [assessment_payload(assess(t, selection)) for t in ws.threats]

    @app.get(f"{API_PREFIX}/pyramid")
    async def get_pyramid():
        return pyramid_payload

    @app.get(f"{API_PREFIX}/graph.dot", response_class=PlainTextResponse)
    async def get_graph() -> PlainTextResponse:
        return PlainTextResponse(dot_text, media_type="text/plain; charset=utf-8")

    @app.get(API_PREFIX + "/flows/{flow_id}")
    async def get_flow(flow_id: str, actor: str = "external"):
        found = ws.find_flow(flow_id)
        if found is None:
            raise ApiError(
                404, CODE_UNKNOWN_ID, f"no attack flow with id {flow_id!r}"
            )
        threat, flow = found
        try:
            actor_class = ActorClass(actor)
        except ValueError:
            allowed = ", ".join(member.value for member in ActorClass)
            raise ApiError(
                422,
                CODE_BAD_REQUEST,
                f"unknown actor {actor!r}; expected one of: {allowed}",
            ) from None
        try:
            path = actor_path(flow, actor_class)
        except UnknownActorError as exc:
            raise ApiError(422, CODE_UNKNOWN_ID, str(exc)) from exc
        return {
            "flow_id": flow.id,
            "threat_id": threat.id,
            "actor": actor_class.value,
            "entry_index": path.entry_index,
            "skipped_count": path.skipped_count,
            "steps": [
                _step_payload(step, skipped=step.index < path.entry_index)
                for step in flow.steps
            ],
        }

    if ui_dir:
        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def create_app_from_dir(
    root_dir: str | Path,
    allow_origin: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Load a workspace directory and wrap it in an application.

    Fails fast (raising the usual catalog errors) when the workspace does
    not parse or validate; a server should never start on a broken one.
    """
    return create_app(load_workspace(root_dir), allow_origin, ui_dir)
