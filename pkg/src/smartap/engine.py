"""AP selection loop: scan, smooth, assign, migrate.

Each iteration, in order: apply queued channel changes and manual
handoffs, scan every connected agent on its serving channel, fold the
reports into the smoothed attenuation matrix, compute the station/AP
assignment (greedy, load-penalized, hysteresis-gated), execute the
resulting LVAP migrations, publish everything to the data gateway, and
finally apply queued parameter changes so the next iteration starts from
a consistent configuration. No parameter mutation is ever observable
mid-iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .agent import Lvap, ScanReport
from .gateway import DataGateway
from .links import AgentBusy, AgentCommandError, AgentUnreachable, Controller
from .macaddr import derive_bssid
from .params import Parameters

NEG_INF = float("-inf")


@dataclass(frozen=True)
class MatrixCell:
    smoothed_rssi: float
    staleness: int = 0


@dataclass(frozen=True)
class AttenuationMatrix:
    """AP x station table of smoothed RSSI with per-cell staleness."""

    cells: dict[tuple[str, str], MatrixCell] = field(default_factory=dict)
    timestamp: float = 0.0

    def rssi(self, ap_ip: str, sta_mac: str) -> Optional[float]:
        cell = self.cells.get((ap_ip, sta_mac))
        return cell.smoothed_rssi if cell else None

    def stations(self) -> list[str]:
        return sorted({sta for _, sta in self.cells})

    def aps(self) -> list[str]:
        return sorted({ap for ap, _ in self.cells})

    def to_payload(self, aps: Optional[list[str]] = None) -> dict:
        return {
            "aps": sorted(aps) if aps is not None else self.aps(),
            "stas": self.stations(),
            "cells": [
                {
                    "ap": ap,
                    "sta": sta,
                    "rssi": cell.smoothed_rssi,
                    "staleness": cell.staleness,
                }
                for (ap, sta), cell in sorted(self.cells.items())
            ],
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class HandoffCommand:
    sta_mac: str
    source: str
    target: str
    reason: str  # "algorithm" | "manual"

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("handoff source and target must differ")


def smooth_rssi(alpha: float, new_rssi: float, historic: float) -> float:
    """Exponentially smoothed RSSI: alpha weighs the new sample."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * new_rssi + (1.0 - alpha) * historic


def update_matrix(
    matrix: AttenuationMatrix,
    reports: list[ScanReport],
    params: Parameters,
    timestamp: Optional[float] = None,
) -> AttenuationMatrix:
    """Fold one round of scan reports into a new matrix.

    Observed cells are smoothed (a first observation seeds the history with
    the raw sample); unobserved cells age by one scan and are evicted when
    staleness reaches the limit.
    """
    observed: dict[tuple[str, str], float] = {}
    for report in reports:
        for obs in report.observations:
            observed[(report.ap_ip, obs.sta_mac)] = obs.raw_rssi

    cells: dict[tuple[str, str], MatrixCell] = {}
    for key, cell in matrix.cells.items():
        if key in observed:
            cells[key] = MatrixCell(
                smoothed_rssi=smooth_rssi(params.alpha, observed.pop(key), cell.smoothed_rssi),
                staleness=0,
            )
        elif cell.staleness + 1 < params.stale_scans_limit:
            cells[key] = MatrixCell(cell.smoothed_rssi, cell.staleness + 1)
        # else evicted

    for key, raw in observed.items():
        cells[key] = MatrixCell(smoothed_rssi=raw, staleness=0)

    if timestamp is None:
        timestamp = max((r.timestamp for r in reports), default=matrix.timestamp)
    return AttenuationMatrix(cells=cells, timestamp=timestamp)


def compute_assignment(
    matrix: AttenuationMatrix,
    current: dict[str, str],
    params: Parameters,
    connected_aps: list[str],
) -> tuple[dict[str, str], list[HandoffCommand]]:
    """Greedy station placement over the smoothed matrix.

    Stations are visited in ascending MAC order. A station's score at an AP
    is its smoothed RSSI there minus beta per station already placed on
    that AP (itself excluded) in the evolving tentative assignment. The
    best-scoring AP wins, ties to the lexicographically lowest IP; an
    associated station only moves when the winner beats its current host
    by more than the hysteresis margin. Stations heard by no connected AP
    stay put. Deterministic: same inputs, same commands.
    """
    connected = sorted(set(connected_aps))
    assignment = {sta: ap for sta, ap in current.items() if ap in connected}
    counts: dict[str, int] = {ap: 0 for ap in connected}
    for ap in assignment.values():
        counts[ap] += 1

    stations = sorted(set(matrix.stations()) | set(assignment))
    commands: list[HandoffCommand] = []

    for sta in stations:
        candidates = [ap for ap in connected if (ap, sta) in matrix.cells]
        cur = assignment.get(sta)
        if not candidates:
            continue  # nothing audible: stays put (or stays unassociated)

        def score(ap: str) -> float:
            rssi = matrix.rssi(ap, sta)
            if rssi is None:
                return NEG_INF
            load = counts[ap] - (1 if cur == ap else 0)
            return rssi - params.load_penalty_beta * load

        best = min(candidates, key=lambda ap: (-score(ap), ap))
        if cur is None:
            assignment[sta] = best
            counts[best] += 1
        elif best != cur and score(best) - score(cur) > params.hysteresis:
            commands.append(HandoffCommand(sta_mac=sta, source=cur, target=best, reason="algorithm"))
            assignment[sta] = best
            counts[cur] -= 1
            counts[best] += 1

    return assignment, commands


@dataclass
class IterationSummary:
    iteration: int
    sim_time: float
    duration_s: float
    scan_interval: float
    reports: int
    associations: list[dict]
    handoffs: list[dict]
    matrix_cells: int

    def to_event(self, matrix: dict, assignment: dict[str, str]) -> dict:
        return {
            "event": "iteration",
            "iteration": self.iteration,
            "sim_time": self.sim_time,
            "duration_s": self.duration_s,
            "scan_interval": self.scan_interval,
            "reports": self.reports,
            "handoffs": len(self.handoffs),
            "associations": len(self.associations),
            "assignment": dict(sorted(assignment.items())),
            "matrix": matrix,
        }


class SelectionEngine:
    """Owns the loop state: matrix, assignment, parameters, client registry."""

    def __init__(
        self,
        controller: Controller,
        gateway: DataGateway,
        clock,
        ssid: str = "smartap",
        events: Optional[Callable[[dict], None]] = None,
        params: Optional[Parameters] = None,
    ):
        self.controller = controller
        self.gateway = gateway
        self.clock = clock
        self.ssid = ssid
        self.params = params or Parameters()
        self.matrix = AttenuationMatrix()
        self.assignment: dict[str, str] = {}
        self.iteration = 0
        self._events = events
        self._clients: dict[str, dict] = {}
        self._published_stations: set[str] = set()

    # -- lifecycle ----------------------------------------------------------

    def initialize(self) -> None:
        """Create gateway tables and publish the starting parameter set."""
        from .gateway import init_tables

        init_tables(self.gateway)
        self.gateway.put("params", "current", self.params.to_dict())

    def emit(self, event: dict) -> None:
        if self._events:
            event.setdefault("sim_time", self.clock.now())
            self._events(event)

    # -- main loop ------------------------------------------------------------

    def run_iteration(self) -> IterationSummary:
        started = time.perf_counter()
        now = self.clock.now()
        self.iteration += 1
        params = self.params  # pinned for the whole iteration

        self._apply_channel_changes()
        manual_results = self._apply_manual_handoffs()
        self._reconcile_disconnected()

        reports = self._collect_reports(params)
        self.matrix = update_matrix(self.matrix, reports, params, timestamp=now)
        self._register_clients(reports, now)
        self._deassociate_vanished()

        connected = [a.ip for a in self.controller.connected_agents()]
        proposed, commands = compute_assignment(self.matrix, self.assignment, params, connected)

        associations = []
        for sta in sorted(proposed):
            if sta not in self.assignment:
                if self._associate(sta, proposed[sta], reason="algorithm"):
                    associations.append({"sta": sta, "ap": proposed[sta]})

        handoffs = list(manual_results)
        for cmd in commands:
            outcome = self.execute_handoff(cmd)
            handoffs.append(
                {"sta": cmd.sta_mac, "source": cmd.source, "target": cmd.target,
                 "reason": cmd.reason, "outcome": outcome}
            )

        matrix_payload = self.matrix.to_payload(aps=connected)
        self._publish(now, reports, matrix_payload)
        self._drain_params()

        duration = time.perf_counter() - started
        summary = IterationSummary(
            iteration=self.iteration,
            sim_time=now,
            duration_s=duration,
            scan_interval=params.scan_interval,
            reports=len(reports),
            associations=associations,
            handoffs=handoffs,
            matrix_cells=len(self.matrix.cells),
        )
        self.gateway.put(
            "loop",
            "latest",
            {
                "iteration": summary.iteration,
                "sim_time": summary.sim_time,
                "duration_s": summary.duration_s,
                "scan_interval": summary.scan_interval,
                "reports": summary.reports,
                "handoffs": len(summary.handoffs),
                "associations": len(summary.associations),
            },
        )
        self.emit(summary.to_event(matrix_payload, self.assignment))
        return summary

    # -- handoffs -------------------------------------------------------------

    def execute_handoff(self, cmd: HandoffCommand) -> str:
        """ADD to the target, then REMOVE from the source.

        Returns committed, committed_with_warning (source remove timed out;
        the target is authoritative) or failed (target add failed; nothing
        changed).
        """
        if self.assignment.get(cmd.sta_mac) != cmd.source:
            return "failed"  # stale command; station moved or left meanwhile
        lvap = self._lvap_for(cmd.sta_mac, cmd.target)
        try:
            self.controller.add_lvap(cmd.target, lvap)
        except (AgentUnreachable, AgentCommandError) as exc:
            self.emit(
                {"event": "handoff", "sta": cmd.sta_mac, "source": cmd.source,
                 "target": cmd.target, "reason": cmd.reason, "outcome": "failed",
                 "bssid": lvap.bssid, "detail": str(exc)}
            )
            return "failed"
        self.emit({"event": "lvap_added", "ap": cmd.target, "sta": cmd.sta_mac, "bssid": lvap.bssid})
        self.assignment[cmd.sta_mac] = cmd.target

        outcome = "committed"
        try:
            self.controller.remove_lvap(cmd.source, cmd.sta_mac)
            self.emit(
                {"event": "lvap_removed", "ap": cmd.source, "sta": cmd.sta_mac, "bssid": lvap.bssid}
            )
        except AgentUnreachable:
            # source just got marked disconnected; its table resets on re-HELLO
            outcome = "committed_with_warning"
        except AgentCommandError:
            outcome = "committed_with_warning"
        self.emit(
            {"event": "handoff", "sta": cmd.sta_mac, "source": cmd.source, "target": cmd.target,
             "reason": cmd.reason, "outcome": outcome, "bssid": lvap.bssid}
        )
        return outcome

    def associate(self, sta_mac: str, ap_ip: str, reason: str = "initial") -> bool:
        """Create the station's LVAP on an AP (first association, no source)."""
        return self._associate(sta_mac, ap_ip, reason=reason)

    def _associate(self, sta_mac: str, ap_ip: str, reason: str) -> bool:
        lvap = self._lvap_for(sta_mac, ap_ip)
        try:
            self.controller.add_lvap(ap_ip, lvap)
        except (AgentUnreachable, AgentCommandError) as exc:
            self.emit(
                {"event": "association_failed", "sta": sta_mac, "ap": ap_ip, "detail": str(exc)}
            )
            return False
        self.assignment[sta_mac] = ap_ip
        self.emit({"event": "lvap_added", "ap": ap_ip, "sta": sta_mac, "bssid": lvap.bssid})
        self.emit(
            {"event": "association", "sta": sta_mac, "ap": ap_ip, "bssid": lvap.bssid,
             "reason": reason}
        )
        now = self.clock.now()
        client = self._clients.setdefault(
            sta_mac,
            {"mac": sta_mac, "bssid": lvap.bssid, "first_seen": now, "last_seen": now,
             "connected": True},
        )
        client["connected"] = True
        return True

    def _lvap_for(self, sta_mac: str, host_ap: str) -> Lvap:
        return Lvap(sta_mac=sta_mac, bssid=derive_bssid(sta_mac), ssid=self.ssid, host_ap=host_ap)

    # -- iteration pieces -------------------------------------------------------

    def _apply_channel_changes(self) -> None:
        for change in self.gateway.drain_channel_changes():
            try:
                self.controller.set_channel(change.ap_ip, change.channel)
                self.emit(
                    {"event": "channel_applied", "ap": change.ap_ip, "channel": change.channel}
                )
            except (AgentUnreachable, AgentCommandError) as exc:
                self.emit(
                    {"event": "channel_failed", "ap": change.ap_ip, "channel": change.channel,
                     "detail": str(exc)}
                )

    def _apply_manual_handoffs(self) -> list[dict]:
        results = []
        for req in self.gateway.drain_manual_handoffs():
            source = self.assignment.get(req.sta_mac)
            if source is None or source == req.target_ip:
                self.emit(
                    {"event": "handoff", "sta": req.sta_mac, "source": source,
                     "target": req.target_ip, "reason": "manual", "outcome": "rejected"}
                )
                continue
            cmd = HandoffCommand(
                sta_mac=req.sta_mac, source=source, target=req.target_ip, reason="manual"
            )
            outcome = self.execute_handoff(cmd)
            results.append(
                {"sta": cmd.sta_mac, "source": cmd.source, "target": cmd.target,
                 "reason": "manual", "outcome": outcome}
            )
        return results

    def _reconcile_disconnected(self) -> None:
        connected = {a.ip for a in self.controller.connected_agents()}
        for sta, ap in list(self.assignment.items()):
            if ap not in connected:
                del self.assignment[sta]
                if sta in self._clients:
                    self._clients[sta]["connected"] = False
                self.emit({"event": "deassociation", "sta": sta, "ap": ap, "cause": "agent_lost"})

    def _collect_reports(self, params: Parameters) -> list[ScanReport]:
        reports = []
        for info in self.controller.connected_agents():
            try:
                report, stale = self.controller.scan(info.ip, info.channel, params.scan_duration)
            except (AgentUnreachable, AgentBusy, AgentCommandError):
                continue  # no report this round; cells age by staleness
            if stale:
                continue
            reports.append(report)
        return reports

    def _register_clients(self, reports: list[ScanReport], now: float) -> None:
        for report in reports:
            for obs in report.observations:
                client = self._clients.get(obs.sta_mac)
                if client is None:
                    self._clients[obs.sta_mac] = {
                        "mac": obs.sta_mac,
                        "bssid": derive_bssid(obs.sta_mac),
                        "first_seen": now,
                        "last_seen": now,
                        "connected": False,
                    }
                else:
                    client["last_seen"] = now

    def _deassociate_vanished(self) -> None:
        heard = {sta for _, sta in self.matrix.cells}
        for sta, ap in list(self.assignment.items()):
            if sta in heard:
                continue
            try:
                self.controller.remove_lvap(ap, sta)
                self.emit(
                    {"event": "lvap_removed", "ap": ap, "sta": sta, "bssid": derive_bssid(sta)}
                )
            except (AgentUnreachable, AgentCommandError):
                pass
            del self.assignment[sta]
            if sta in self._clients:
                self._clients[sta]["connected"] = False
            self.emit({"event": "deassociation", "sta": sta, "ap": ap, "cause": "out_of_range"})

    def _drain_params(self) -> None:
        for change in self.gateway.drain_param_changes():
            self.params = self.params.replace(change.name, change.value)
            self.emit({"event": "param_applied", "name": change.name, "value": change.value})
        self.gateway.put("params", "current", self.params.to_dict())

    # -- publishing ---------------------------------------------------------------

    def _publish(self, now: float, reports: list[ScanReport], matrix_payload: dict) -> None:
        gw = self.gateway
        gw.put("matrix", "current", matrix_payload)

        station_macs = set(self.assignment)
        for sta in sorted(station_macs):
            host = self.assignment[sta]
            gw.put(
                "stations_current",
                sta,
                {"mac": sta, "bssid": derive_bssid(sta), "host": host,
                 "rssi": self.matrix.rssi(host, sta)},
            )
        for sta in self._published_stations - station_macs:
            gw.delete("stations_current", sta)
        self._published_stations = station_macs

        lvap_counts: dict[str, int] = {}
        for ap in self.assignment.values():
            lvap_counts[ap] = lvap_counts.get(ap, 0) + 1
        for info in self.controller.all_agents():
            gw.put(
                "agents",
                info.ip,
                {"ip": info.ip, "mac": info.mac, "channel": info.channel,
                 "lvap_count": lvap_counts.get(info.ip, 0),
                 "last_heartbeat": info.last_heartbeat, "connected": info.connected},
            )

        for mac, client in self._clients.items():
            client = dict(client)
            client["connected"] = mac in self.assignment
            gw.put("clients_ever", mac, client)

        for report in reports:
            gw.put(
                "stats",
                report.ap_ip,
                {
                    "ap": report.ap_ip,
                    "timestamp": report.timestamp,
                    "stations": [
                        {
                            "mac": o.sta_mac,
                            "packet_count": o.stats.packet_count,
                            "airtime": o.stats.airtime,
                            "avg_rssi": o.stats.avg_rssi,
                            "smoothed_rssi": self.matrix.rssi(report.ap_ip, o.sta_mac),
                        }
                        for o in report.observations
                    ],
                },
            )
            payload = report.to_payload()
            payload["ap"] = payload.pop("ap_ip")
            payload["stale"] = False
            gw.put("last_scans", report.ap_ip, payload)
