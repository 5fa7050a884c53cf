"""Request/response models for the management API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

ErrorCode = Literal["not_found", "validation", "busy", "agent_unreachable"]


class ApiError(BaseModel):
    code: ErrorCode
    message: str


class ClientOut(BaseModel):
    mac: str
    bssid: str
    first_seen: float
    last_seen: float
    connected: bool


class StationOut(BaseModel):
    mac: str
    bssid: str
    host: str
    rssi: Optional[float] = None


class AgentOut(BaseModel):
    ip: str
    mac: str
    channel: int
    lvap_count: int
    last_heartbeat: float


class MatrixCellOut(BaseModel):
    ap: str
    sta: str
    rssi: float
    staleness: int


class MatrixOut(BaseModel):
    aps: list[str]
    stas: list[str]
    cells: list[MatrixCellOut]
    timestamp: float


class ParamsOut(BaseModel):
    alpha: float
    scan_interval: float
    hysteresis: float
    load_penalty_beta: float
    stale_scans_limit: int
    scan_duration: float
    pending: dict[str, Any] = Field(default_factory=dict)


class ChannelChangeIn(BaseModel):
    channel: int


class HandoffIn(BaseModel):
    sta_mac: str
    target_ip: str


class ScanIn(BaseModel):
    ap_ip: str
    channel: int


class ParamUpdateIn(BaseModel):
    name: str
    value: float | int


class ScanObservationOut(BaseModel):
    sta_mac: str
    raw_rssi: float
    packet_count: int
    airtime: float
    avg_rssi: float
    window_start: float
    window_end: float


class ScanReportOut(BaseModel):
    ap: str
    channel: int
    timestamp: float
    stale: bool
    observations: list[ScanObservationOut]


class AcceptedOut(BaseModel):
    status: Literal["accepted"] = "accepted"
    detail: str
