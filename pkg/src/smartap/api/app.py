"""HTTP management service.

Nine JSON endpoints bridging operator clients to the gateway tables and
the loop's mutation queues. Reads come straight from the gateway and
never block the loop; mutations are accepted (202) and applied at the
next loop boundary. The one exception is POST /api/scan, which talks to
the agent out-of-band and returns the cached last report flagged stale
when the agent is mid-scan.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..gateway import DataGateway, RowNotFound
from ..links import AgentBusy, AgentCommandError, AgentUnreachable, Controller
from ..params import ParamError
from ..scenario import ALLOWED_CHANNELS
from .models import (
    AcceptedOut,
    AgentOut,
    ApiError,
    ChannelChangeIn,
    ClientOut,
    HandoffIn,
    MatrixOut,
    ParamsOut,
    ParamUpdateIn,
    ScanIn,
    ScanReportOut,
    StationOut,
)

_STATUS = {"not_found": 404, "validation": 400, "busy": 409, "agent_unreachable": 502}


class ApiException(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def create_app(gateway: DataGateway, controller: Controller, events=None) -> FastAPI:
    app = FastAPI(title="smartap management API", docs_url="/docs")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def emit(event: dict) -> None:
        if events:
            events(event)

    @app.exception_handler(ApiException)
    async def api_exception_handler(_: Request, exc: ApiException):
        return JSONResponse(
            status_code=_STATUS[exc.code],
            content=ApiError(code=exc.code, message=exc.message).model_dump(),
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content=ApiError(code="validation", message=str(exc.errors()[:1])).model_dump(),
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(_: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "validation"
        return JSONResponse(
            status_code=exc.status_code,
            content=ApiError(code=code, message=str(exc.detail)).model_dump(),
        )

    # -- reads ---------------------------------------------------------------

    @app.get("/api/clients", response_model=list[ClientOut])
    def get_clients():
        return gateway.list("clients_ever")

    @app.get("/api/stations", response_model=list[StationOut])
    def get_stations():
        return gateway.list("stations_current")

    @app.get("/api/agents", response_model=list[AgentOut])
    def get_agents():
        return [row for row in gateway.list("agents") if row["connected"]]

    @app.get("/api/matrix", response_model=MatrixOut)
    def get_matrix():
        try:
            return gateway.get("matrix", "current")
        except RowNotFound:
            return {"aps": [], "stas": [], "cells": [], "timestamp": 0.0}

    @app.get("/api/params", response_model=ParamsOut)
    def get_params():
        row = gateway.get("params", "current")
        pending: dict = {}
        for change in gateway.peek_param_changes():
            pending[change.name] = change.value  # last queued write wins
        row["pending"] = pending
        return row

    # -- mutations -----------------------------------------------------------

    @app.put("/api/params", response_model=AcceptedOut, status_code=202)
    def put_param(update: ParamUpdateIn):
        try:
            change = gateway.enqueue_param_change(update.name, update.value)
        except ParamError as exc:
            raise ApiException("validation", str(exc))
        emit({"event": "api_mutation", "kind": "param", "name": change.name,
              "value": change.value})
        return AcceptedOut(detail=f"{update.name} queued; applies at the next loop boundary")

    @app.post("/api/agents/{ip}/channel", response_model=AcceptedOut, status_code=202)
    def post_channel(ip: str, change: ChannelChangeIn):
        if not _agent_connected(gateway, ip):
            raise ApiException("not_found", f"agent {ip} is not connected")
        if change.channel not in ALLOWED_CHANNELS:
            raise ApiException("validation", f"channel must be in 1..13, got {change.channel}")
        gateway.enqueue_channel_change(ip, change.channel)
        emit({"event": "api_mutation", "kind": "channel", "ap": ip, "channel": change.channel})
        return AcceptedOut(detail=f"channel change queued for {ip}")

    @app.post("/api/handoff", response_model=AcceptedOut, status_code=202)
    def post_handoff(req: HandoffIn):
        try:
            station = gateway.get("stations_current", req.sta_mac)
        except RowNotFound:
            raise ApiException("not_found", f"station {req.sta_mac} is not associated")
        if not _agent_connected(gateway, req.target_ip):
            raise ApiException("not_found", f"agent {req.target_ip} is not connected")
        if station["host"] == req.target_ip:
            raise ApiException("validation", f"{req.sta_mac} is already hosted by {req.target_ip}")
        gateway.enqueue_manual_handoff(req.sta_mac, req.target_ip)
        emit({"event": "api_mutation", "kind": "handoff", "sta": req.sta_mac,
              "target": req.target_ip})
        return AcceptedOut(detail=f"handoff of {req.sta_mac} to {req.target_ip} queued")

    @app.post("/api/scan", response_model=ScanReportOut)
    def post_scan(req: ScanIn):
        if not _agent_connected(gateway, req.ap_ip):
            raise ApiException("not_found", f"agent {req.ap_ip} is not connected")
        if req.channel not in ALLOWED_CHANNELS:
            raise ApiException("validation", f"channel must be in 1..13, got {req.channel}")
        duration = gateway.get("params", "current")["scan_duration"]
        try:
            report, stale = controller.scan(req.ap_ip, req.channel, duration)
        except AgentBusy:
            raise ApiException("busy", f"agent {req.ap_ip} is scanning and has no cached report")
        except AgentUnreachable as exc:
            raise ApiException("agent_unreachable", str(exc))
        except AgentCommandError as exc:
            raise ApiException("validation", str(exc))
        payload = report.to_payload()
        observations = [
            {"sta_mac": o["sta_mac"], "raw_rssi": o["raw_rssi"], **o["stats"]}
            for o in payload["observations"]
        ]
        row = {
            "ap": payload["ap_ip"],
            "channel": payload["channel"],
            "timestamp": payload["timestamp"],
            "observations": payload["observations"],
            "stale": stale,
        }
        gateway.put("last_scans", report.ap_ip, row)
        emit({"event": "api_mutation", "kind": "scan", "ap": req.ap_ip,
              "channel": req.channel, "stale": stale})
        return {
            "ap": payload["ap_ip"],
            "channel": payload["channel"],
            "timestamp": payload["timestamp"],
            "stale": stale,
            "observations": observations,
        }

    return app


def _agent_connected(gateway: DataGateway, ip: str) -> bool:
    try:
        return bool(gateway.get("agents", ip)["connected"])
    except RowNotFound:
        return False
