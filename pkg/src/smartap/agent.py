"""Simulated access point agent.

Hosts per-station virtual APs, serves one channel, and answers controller
commands: add/remove LVAP, set channel, scan. Each agent processes one
command at a time; the scan busy window is tracked against the scenario
clock so overlapping scan requests inside it get the cached last report
instead of a second scan.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from . import protocol
from .macaddr import normalize_mac
from .radio import RadioEnvironment
from .scenario import ALLOWED_CHANNELS

# Per-packet airtime by modulation tier. Poor RSSI forces a slow tier, so a
# badly placed station burns the scan window sending few packets.
FAST_TIER_DBM = -65.0
MEDIUM_TIER_DBM = -78.0
AIRTIME_PER_PACKET_S = {"fast": 0.0006, "medium": 0.0024, "slow": 0.0096}

DEFAULT_SCAN_DURATION_S = 0.06


class LvapConflict(Exception):
    """An LVAP with the same BSSID but a different station is already hosted."""


class InvalidChannel(ValueError):
    """Channel outside the allowed 1..13 set."""


class ScanBusy(Exception):
    """Agent is inside a scan window; carries the cached last report."""

    def __init__(self, last_report: Optional["ScanReport"]):
        self.last_report = last_report
        super().__init__("agent is already scanning")


@dataclass(frozen=True)
class Lvap:
    sta_mac: str
    bssid: str
    ssid: str
    host_ap: str

    def to_payload(self) -> dict:
        return {"sta_mac": self.sta_mac, "bssid": self.bssid, "ssid": self.ssid}


@dataclass(frozen=True)
class StaStats:
    sta_mac: str
    packet_count: int
    airtime: float
    avg_rssi: float
    window_start: float
    window_end: float

    def to_payload(self) -> dict:
        return {
            "packet_count": self.packet_count,
            "airtime": self.airtime,
            "avg_rssi": self.avg_rssi,
            "window_start": self.window_start,
            "window_end": self.window_end,
        }

    @classmethod
    def from_payload(cls, sta_mac: str, raw: dict) -> "StaStats":
        return cls(
            sta_mac=sta_mac,
            packet_count=int(raw["packet_count"]),
            airtime=float(raw["airtime"]),
            avg_rssi=float(raw["avg_rssi"]),
            window_start=float(raw["window_start"]),
            window_end=float(raw["window_end"]),
        )


@dataclass(frozen=True)
class Observation:
    sta_mac: str
    raw_rssi: float
    stats: StaStats


@dataclass(frozen=True)
class ScanReport:
    ap_ip: str
    channel: int
    timestamp: float
    observations: tuple[Observation, ...] = field(default_factory=tuple)

    def to_payload(self) -> dict:
        return {
            "ap_ip": self.ap_ip,
            "channel": self.channel,
            "timestamp": self.timestamp,
            "observations": [
                {"sta_mac": o.sta_mac, "raw_rssi": o.raw_rssi, "stats": o.stats.to_payload()}
                for o in self.observations
            ],
        }

    @classmethod
    def from_payload(cls, raw: dict) -> "ScanReport":
        observations = tuple(
            Observation(
                sta_mac=o["sta_mac"],
                raw_rssi=float(o["raw_rssi"]),
                stats=StaStats.from_payload(o["sta_mac"], o["stats"]),
            )
            for o in raw["observations"]
        )
        return cls(
            ap_ip=raw["ap_ip"],
            channel=int(raw["channel"]),
            timestamp=float(raw["timestamp"]),
            observations=observations,
        )


def airtime_per_packet(rssi: float) -> float:
    if rssi >= FAST_TIER_DBM:
        return AIRTIME_PER_PACKET_S["fast"]
    if rssi >= MEDIUM_TIER_DBM:
        return AIRTIME_PER_PACKET_S["medium"]
    return AIRTIME_PER_PACKET_S["slow"]


def synthesize_stats(
    sta_mac: str, rssi: float, offered_load_pps: float, start: float, duration: float
) -> StaStats:
    """Traffic counters for one station over a scan window.

    The station offers `offered_load_pps` packets per second; the channel
    caps what fits in the window at its modulation tier, so airtime never
    exceeds the window length.
    """
    per_packet = airtime_per_packet(rssi)
    offered = round(offered_load_pps * duration)
    capacity = int(duration / per_packet)
    sent = max(0, min(offered, capacity))
    return StaStats(
        sta_mac=sta_mac,
        packet_count=sent,
        airtime=sent * per_packet,
        avg_rssi=rssi,
        window_start=start,
        window_end=start + duration,
    )


class ApAgent:
    """One simulated AP: LVAP table, serving channel, scan cache."""

    def __init__(self, env: RadioEnvironment, ip: str, mac: str, channel: int):
        if channel not in ALLOWED_CHANNELS:
            raise InvalidChannel(f"channel {channel} outside 1..13")
        self.env = env
        self.ip = ip
        self.mac = normalize_mac(mac)
        self.channel = channel
        self.lvaps: dict[str, Lvap] = {}
        self.last_scan: Optional[ScanReport] = None
        self._busy_until = float("-inf")
        self._lock = threading.Lock()

    def reset(self) -> None:
        """Fresh-boot state, applied when the agent (re)connects."""
        with self._lock:
            self.lvaps.clear()
            self.last_scan = None
            self._busy_until = float("-inf")

    def handle_add_lvap(self, lvap: Lvap) -> None:
        with self._lock:
            existing = self.lvaps.get(lvap.sta_mac)
            if existing is not None and existing.bssid == lvap.bssid:
                return  # idempotent re-add
            for other in self.lvaps.values():
                if other.bssid == lvap.bssid and other.sta_mac != lvap.sta_mac:
                    raise LvapConflict(
                        f"bssid {lvap.bssid} already bound to {other.sta_mac}"
                    )
            self.lvaps[lvap.sta_mac] = lvap
            self.env.directory.claim(lvap.sta_mac, self.ip, self.channel)

    def handle_remove_lvap(self, sta_mac: str) -> None:
        with self._lock:
            if self.lvaps.pop(sta_mac, None) is not None:
                self.env.directory.release(sta_mac, self.ip)

    def handle_set_channel(self, channel: int) -> None:
        if not isinstance(channel, int) or channel not in ALLOWED_CHANNELS:
            raise InvalidChannel(f"channel {channel} outside 1..13")
        with self._lock:
            self.channel = channel
            for sta_mac in self.lvaps:
                self.env.directory.retune(sta_mac, self.ip, channel)

    def perform_scan(self, channel: int, duration: float = DEFAULT_SCAN_DURATION_S) -> ScanReport:
        if channel not in ALLOWED_CHANNELS:
            raise InvalidChannel(f"channel {channel} outside 1..13")
        if duration <= 0:
            raise ValueError("scan duration must be positive")
        with self._lock:
            now = self.env.clock.now()
            if now < self._busy_until:
                raise ScanBusy(self.last_scan)
            observations = []
            for sta_mac in self.env.station_macs():
                rssi = self.env.rssi_at(self.ip, sta_mac, channel, now)
                if rssi is None:
                    continue
                stats = synthesize_stats(
                    sta_mac, rssi, self.env.offered_load_pps(sta_mac), now, duration
                )
                observations.append(Observation(sta_mac=sta_mac, raw_rssi=rssi, stats=stats))
            report = ScanReport(
                ap_ip=self.ip, channel=channel, timestamp=now, observations=tuple(observations)
            )
            self.last_scan = report
            self._busy_until = now + duration
            return report

    def hello_payload(self) -> dict:
        return {
            "ip": self.ip,
            "mac": self.mac,
            "channel": self.channel,
            "capabilities": ["lvap", "scan"],
        }

    def handle_message(self, msg: protocol.ControlMessage) -> protocol.ControlMessage:
        """Dispatch one control message, returning its terminal response."""
        kind = msg.kind
        if kind == protocol.PING:
            return msg.response_to(protocol.PONG)
        if kind == protocol.ADD_LVAP:
            lvap = Lvap(
                sta_mac=msg.payload["sta_mac"],
                bssid=msg.payload["bssid"],
                ssid=msg.payload["ssid"],
                host_ap=self.ip,
            )
            try:
                self.handle_add_lvap(lvap)
            except LvapConflict as exc:
                return msg.response_to(protocol.ERROR, {"code": "conflict", "message": str(exc)})
            return msg.response_to(protocol.ACK)
        if kind == protocol.REMOVE_LVAP:
            self.handle_remove_lvap(msg.payload["sta_mac"])
            return msg.response_to(protocol.ACK)
        if kind == protocol.SET_CHANNEL:
            try:
                self.handle_set_channel(msg.payload["channel"])
            except InvalidChannel as exc:
                return msg.response_to(protocol.ERROR, {"code": "validation", "message": str(exc)})
            return msg.response_to(protocol.ACK)
        if kind == protocol.SCAN_REQUEST:
            try:
                report = self.perform_scan(msg.payload["channel"], float(msg.payload["duration"]))
            except ScanBusy as exc:
                cached = exc.last_report.to_payload() if exc.last_report else None
                return msg.response_to(protocol.BUSY, {"last_report": cached})
            except (InvalidChannel, ValueError) as exc:
                return msg.response_to(protocol.ERROR, {"code": "validation", "message": str(exc)})
            return msg.response_to(protocol.SCAN_REPORT, report.to_payload())
        return msg.response_to(
            protocol.ERROR, {"code": "validation", "message": f"unexpected request kind {kind}"}
        )
