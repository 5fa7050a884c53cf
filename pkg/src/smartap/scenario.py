"""Scenario file loading and validation.

A scenario is a YAML document describing the world box, the radio model,
the APs (management IP, MAC, position, initial channel), the stations
(MAC, mobility track, optional offered load / active window / initial AP)
and the controller parameter overrides. See docs/scenario-format.md for
the full schema. Validation errors name the offending field.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .macaddr import normalize_mac
from .radio import MobilityTrack, Position, RadioModel, Waypoint

ALLOWED_CHANNELS = range(1, 14)
DEFAULT_SSID = "smartap"


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate; `field` names the culprit."""

    def __init__(self, field_path: str, message: str):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class ScenarioAp:
    ip: str
    mac: str
    position: Position
    channel: int


@dataclass(frozen=True)
class ScenarioStation:
    mac: str
    track: MobilityTrack
    offered_load_pps: float = 200.0
    active_from: float = 0.0
    active_until: Optional[float] = None
    initial_ap: Optional[str] = None


@dataclass(frozen=True)
class Scenario:
    world_width: float
    world_height: float
    seed: int
    radio: RadioModel
    aps: tuple[ScenarioAp, ...]
    stations: tuple[ScenarioStation, ...]
    ssid: str = DEFAULT_SSID
    params: dict[str, Any] = field(default_factory=dict)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("scenario", f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("scenario", f"not valid YAML: {exc}") from exc
    return parse_scenario(doc)


def parse_scenario(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario", "top level must be a mapping")

    world = _require(doc, "world", dict)
    width = _number(world, "world.width", _require(world, "world.width", (int, float), key="width"))
    height = _number(world, "world.height", _require(world, "world.height", (int, float), key="height"))
    if width <= 0 or height <= 0:
        raise ScenarioError("world", "width and height must be positive")

    seed = _require(doc, "seed", int)
    ssid = doc.get("ssid", DEFAULT_SSID)
    if not isinstance(ssid, str) or not ssid:
        raise ScenarioError("ssid", "must be a non-empty string")

    radio = _parse_radio(doc.get("radio", {}))
    aps = _parse_aps(doc.get("aps"), width, height)
    stations = _parse_stations(doc.get("stations"), width, height, {ap.ip for ap in aps})

    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params", "must be a mapping of parameter overrides")

    return Scenario(
        world_width=width,
        world_height=height,
        seed=seed,
        radio=radio,
        aps=tuple(aps),
        stations=tuple(stations),
        ssid=ssid,
        params=dict(params),
    )


def _parse_radio(raw: Any) -> RadioModel:
    if not isinstance(raw, dict):
        raise ScenarioError("radio", "must be a mapping")
    known = {
        "tx_power_dbm",
        "ref_loss_db",
        "path_loss_exponent",
        "noise_sigma_db",
        "rssi_floor_dbm",
        "rssi_ceiling_dbm",
    }
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"radio.{sorted(unknown)[0]}", "unknown radio field")
    kwargs = {}
    for key, value in raw.items():
        kwargs[key] = _number(raw, f"radio.{key}", value)
    try:
        return RadioModel(**kwargs)
    except ValueError as exc:
        raise ScenarioError("radio", str(exc)) from exc


def _parse_aps(raw: Any, width: float, height: float) -> list[ScenarioAp]:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("aps", "must be a non-empty list")
    aps: list[ScenarioAp] = []
    seen_ips: set[str] = set()
    seen_macs: set[str] = set()
    for i, entry in enumerate(raw):
        where = f"aps[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(where, "must be a mapping")
        ip = _parse_ip(f"{where}.ip", entry.get("ip"))
        if ip in seen_ips:
            raise ScenarioError(f"{where}.ip", f"duplicate AP ip {ip}")
        seen_ips.add(ip)
        mac = _parse_mac(f"{where}.mac", entry.get("mac"))
        if mac in seen_macs:
            raise ScenarioError(f"{where}.mac", f"duplicate AP mac {mac}")
        seen_macs.add(mac)
        position = _parse_position(f"{where}.position", entry.get("position"), width, height)
        channel = entry.get("channel", 1)
        if not isinstance(channel, int) or channel not in ALLOWED_CHANNELS:
            raise ScenarioError(f"{where}.channel", "channel must be an integer in 1..13")
        aps.append(ScenarioAp(ip=ip, mac=mac, position=position, channel=channel))
    return aps


def _parse_stations(raw: Any, width: float, height: float, ap_ips: set[str]) -> list[ScenarioStation]:
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        raise ScenarioError("stations", "must be a list")
    stations: list[ScenarioStation] = []
    seen: set[str] = set()
    for i, entry in enumerate(raw):
        where = f"stations[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(where, "must be a mapping")
        mac = _parse_mac(f"{where}.mac", entry.get("mac"))
        if mac in seen:
            raise ScenarioError(f"{where}.mac", f"duplicate station mac {mac}")
        seen.add(mac)
        track = _parse_track(f"{where}.track", entry.get("track"), width, height)
        load = _number(entry, f"{where}.offered_load_pps", entry.get("offered_load_pps", 200.0))
        if load < 0:
            raise ScenarioError(f"{where}.offered_load_pps", "must be >= 0")
        active_from, active_until = _parse_active(f"{where}.active", entry.get("active"))
        initial_ap = entry.get("initial_ap")
        if initial_ap is not None:
            initial_ap = _parse_ip(f"{where}.initial_ap", initial_ap)
            if initial_ap not in ap_ips:
                raise ScenarioError(f"{where}.initial_ap", f"{initial_ap} is not a scenario AP")
        stations.append(
            ScenarioStation(
                mac=mac,
                track=track,
                offered_load_pps=load,
                active_from=active_from,
                active_until=active_until,
                initial_ap=initial_ap,
            )
        )
    return stations


def _parse_track(where: str, raw: Any, width: float, height: float) -> MobilityTrack:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(where, "must be a non-empty list of waypoints")
    waypoints = []
    for i, wp in enumerate(raw):
        if not isinstance(wp, dict):
            raise ScenarioError(f"{where}[{i}]", "must be a mapping with x, y, t")
        x = _number(wp, f"{where}[{i}].x", wp.get("x"))
        y = _number(wp, f"{where}[{i}].y", wp.get("y"))
        t = _number(wp, f"{where}[{i}].t", wp.get("t", 0.0))
        _check_bounds(f"{where}[{i}]", x, y, width, height)
        waypoints.append(Waypoint(Position(x, y), t))
    try:
        return MobilityTrack(waypoints)
    except ValueError as exc:
        raise ScenarioError(where, str(exc)) from exc


def _parse_active(where: str, raw: Any) -> tuple[float, Optional[float]]:
    if raw is None:
        return 0.0, None
    if not isinstance(raw, dict):
        raise ScenarioError(where, "must be a mapping with from/until")
    start = _number(raw, f"{where}.from", raw.get("from", 0.0))
    until = raw.get("until")
    if until is not None:
        until = _number(raw, f"{where}.until", until)
        if until <= start:
            raise ScenarioError(f"{where}.until", "must be after active.from")
    return start, until


def _parse_position(where: str, raw: Any, width: float, height: float) -> Position:
    if not isinstance(raw, dict):
        raise ScenarioError(where, "must be a mapping with x and y")
    x = _number(raw, f"{where}.x", raw.get("x"))
    y = _number(raw, f"{where}.y", raw.get("y"))
    _check_bounds(where, x, y, width, height)
    return Position(x, y)


def _check_bounds(where: str, x: float, y: float, width: float, height: float) -> None:
    if not (0 <= x <= width and 0 <= y <= height):
        raise ScenarioError(where, f"position ({x}, {y}) outside world bounds {width}x{height}")


def _parse_ip(where: str, raw: Any) -> str:
    if not isinstance(raw, str):
        raise ScenarioError(where, "must be an IPv4 address string")
    try:
        return str(ipaddress.IPv4Address(raw))
    except ipaddress.AddressValueError as exc:
        raise ScenarioError(where, f"not a valid IPv4 address: {raw}") from exc


def _parse_mac(where: str, raw: Any) -> str:
    if not isinstance(raw, str):
        raise ScenarioError(where, "must be a MAC address string")
    try:
        return normalize_mac(raw)
    except ValueError as exc:
        raise ScenarioError(where, str(exc)) from exc


def _number(container: Any, where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(where, f"must be a number, got {value!r}")
    return float(value)


def _require(doc: dict, where: str, types, key: str | None = None):
    key = key if key is not None else where
    if key not in doc:
        raise ScenarioError(where, "missing required field")
    value = doc[key]
    if isinstance(value, bool) and types is not bool:
        raise ScenarioError(where, f"wrong type: {value!r}")
    if not isinstance(value, types):
        raise ScenarioError(where, f"wrong type: {value!r}")
    return value
