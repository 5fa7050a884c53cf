"""Virtual radio world: placement, mobility, and log-distance path loss.

The environment answers one question for the agents: what RSSI does AP `a`
hear from station `s` on channel `c` at time `t`. Propagation is
log-distance path loss with Gaussian shadowing; the noise draw is keyed by
(ap, station, t) from the scenario seed, so queries are order-independent
and identical seeds reproduce identical RSSI sequences bit for bit.

Dynamic state is limited to the clock and the channel directory (which
channel each station currently transmits on, driven by LVAP placement).
Everything else is frozen at scenario load.
"""

from __future__ import annotations

import hashlib
import math
import random
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .scenario import Scenario

REFERENCE_DISTANCE_M = 1.0


class UnknownNodeError(KeyError):
    """Raised when an AP or station id is not part of the scenario."""


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Waypoint:
    position: Position
    arrival_time: float


class MobilityTrack:
    """Piecewise-linear path through a list of timed waypoints.

    Before the first waypoint and after the last one the station is
    stationary at that waypoint's position.
    """

    def __init__(self, waypoints: list[Waypoint]):
        if not waypoints:
            raise ValueError("track needs at least one waypoint")
        times = [w.arrival_time for w in waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("waypoint arrival times must be strictly increasing")
        self.waypoints = list(waypoints)

    def position_at(self, t: float) -> Position:
        points = self.waypoints
        if t <= points[0].arrival_time:
            return points[0].position
        if t >= points[-1].arrival_time:
            return points[-1].position
        for prev, nxt in zip(points, points[1:]):
            if t <= nxt.arrival_time:
                span = nxt.arrival_time - prev.arrival_time
                frac = (t - prev.arrival_time) / span
                return Position(
                    prev.position.x + frac * (nxt.position.x - prev.position.x),
                    prev.position.y + frac * (nxt.position.y - prev.position.y),
                )
        return points[-1].position  # unreachable, guarded above


@dataclass(frozen=True)
class RadioModel:
    """Log-distance path loss parameters and receiver dynamic range."""

    tx_power_dbm: float = 20.0
    ref_loss_db: float = 40.0
    path_loss_exponent: float = 2.4
    noise_sigma_db: float = 2.0
    rssi_floor_dbm: float = -95.0
    rssi_ceiling_dbm: float = -20.0

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be > 0")
        if self.noise_sigma_db < 0:
            raise ValueError("noise_sigma_db must be >= 0")
        if self.rssi_floor_dbm >= self.rssi_ceiling_dbm:
            raise ValueError("rssi_floor_dbm must be below rssi_ceiling_dbm")


class SimClock:
    """Simulated clock advanced explicitly by the loop driver."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance(self, dt: float) -> float:
        if dt < 0:
            raise ValueError("clock cannot move backwards")
        with self._lock:
            self._now += dt
            return self._now

    def advance_to(self, t: float) -> float:
        with self._lock:
            if t < self._now:
                raise ValueError("clock cannot move backwards")
            self._now = float(t)
            return self._now


class WallClock:
    """Monotonic wall clock, zeroed at construction."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0


class ChannelDirectory:
    """Which channel each station currently transmits on.

    A station tuned to its LVAP host transmits on that AP's channel; a
    station with no claim is unassociated and probes on every channel.
    Claims are owner-checked: claiming always wins (a handoff target takes
    the station over), but release and retune only apply while the caller
    still owns the station, so the source's late REMOVE after a handoff
    cannot detach the station from its new host.
    """

    def __init__(self):
        self._claims: dict[str, tuple[str, int]] = {}
        self._lock = threading.Lock()

    def claim(self, sta_mac: str, owner_ip: str, channel: int) -> None:
        with self._lock:
            self._claims[sta_mac] = (owner_ip, channel)

    def release(self, sta_mac: str, owner_ip: str) -> None:
        with self._lock:
            claim = self._claims.get(sta_mac)
            if claim and claim[0] == owner_ip:
                del self._claims[sta_mac]

    def retune(self, sta_mac: str, owner_ip: str, channel: int) -> None:
        with self._lock:
            claim = self._claims.get(sta_mac)
            if claim and claim[0] == owner_ip:
                self._claims[sta_mac] = (owner_ip, channel)

    def channel_of(self, sta_mac: str) -> Optional[int]:
        with self._lock:
            claim = self._claims.get(sta_mac)
            return claim[1] if claim else None

    def owner_of(self, sta_mac: str) -> Optional[str]:
        with self._lock:
            claim = self._claims.get(sta_mac)
            return claim[0] if claim else None


class RadioEnvironment:
    """Scenario geometry plus the propagation model, queried by agents."""

    def __init__(self, scenario: "Scenario", clock=None):
        self.scenario = scenario
        self.model = scenario.radio
        self.seed = scenario.seed
        self.clock = clock if clock is not None else SimClock()
        self.directory = ChannelDirectory()
        self._aps = {ap.ip: ap for ap in scenario.aps}
        self._stations = {sta.mac: sta for sta in scenario.stations}

    def ap_ips(self) -> list[str]:
        return sorted(self._aps)

    def station_macs(self) -> list[str]:
        return sorted(self._stations)

    def offered_load_pps(self, sta_mac: str) -> float:
        return self._station(sta_mac).offered_load_pps

    def position_at(self, sta_mac: str, t: float) -> Position:
        return self._station(sta_mac).track.position_at(t)

    def is_active(self, sta_mac: str, t: float) -> bool:
        sta = self._station(sta_mac)
        if t < sta.active_from:
            return False
        return sta.active_until is None or t <= sta.active_until

    def rssi_at(self, ap_ip: str, sta_mac: str, channel: int, t: float) -> Optional[float]:
        """RSSI in dBm, or None when the station is inaudible on `channel`."""
        ap = self._ap(ap_ip)
        sta = self._station(sta_mac)
        if not self.is_active(sta_mac, t):
            return None
        tx_channel = self.directory.channel_of(sta_mac)
        if tx_channel is not None and tx_channel != channel:
            return None
        d = ap.position.distance_to(sta.track.position_at(t))
        loss = self.model.ref_loss_db + 10.0 * self.model.path_loss_exponent * math.log10(
            max(d, REFERENCE_DISTANCE_M) / REFERENCE_DISTANCE_M
        )
        rssi = self.model.tx_power_dbm - loss + self._noise(ap_ip, sta_mac, t)
        return min(max(rssi, self.model.rssi_floor_dbm), self.model.rssi_ceiling_dbm)

    def _noise(self, ap_ip: str, sta_mac: str, t: float) -> float:
        sigma = self.model.noise_sigma_db
        if sigma == 0:
            return 0.0
        key = f"{self.seed}|{ap_ip}|{sta_mac}|".encode() + struct.pack(">d", float(t))
        digest = hashlib.blake2b(key, digest_size=8).digest()
        return random.Random(int.from_bytes(digest, "big")).gauss(0.0, sigma)

    def _ap(self, ap_ip: str):
        try:
            return self._aps[ap_ip]
        except KeyError:
            raise UnknownNodeError(f"unknown AP: {ap_ip}") from None

    def _station(self, sta_mac: str):
        try:
            return self._stations[sta_mac]
        except KeyError:
            raise UnknownNodeError(f"unknown station: {sta_mac}") from None
