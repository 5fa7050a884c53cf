"""Newline-delimited JSON event log and the offline invariant checker.

A headless run appends one JSON object per line: iteration summaries with
matrix snapshots, LVAP add/remove events, handoffs, associations, agent
connects/disconnects, and API mutations. `replay_check` re-validates the
core invariants over a recorded log so CI can fail a run after the fact:

- single-host: a station is hosted by at most two agents at any observed
  instant (the add-before-remove window) and by exactly one after each
  committed handoff;
- bssid-stability: a station's BSSID never changes across events;
- loop-budget: every iteration finishes inside its scan interval, and the
  interval never exceeds the 2 s decision ceiling.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional

LOOP_CEILING_S = 2.0

# Fields that legitimately differ between two runs of the same seed.
VOLATILE_KEYS = frozenset({"duration_s", "wall_time", "last_heartbeat"})


class EventLog:
    """Thread-safe NDJSON writer; optionally fans out to an in-memory list."""

    def __init__(self, path: Optional[str | Path] = None):
        self._file: Optional[IO[str]] = open(path, "w") if path else None
        self._lock = threading.Lock()
        self.records: list[dict] = []

    def emit(self, event: dict) -> None:
        with self._lock:
            self.records.append(event)
            if self._file:
                self._file.write(json.dumps(event, sort_keys=True) + "\n")
                self._file.flush()

    def close(self) -> None:
        with self._lock:
            if self._file:
                self._file.close()
                self._file = None


@dataclass
class Violation:
    invariant: str
    message: str
    line: int

    def __str__(self) -> str:
        return f"line {self.line}: [{self.invariant}] {self.message}"


@dataclass
class ReplayReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    events: int = 0
    iterations: int = 0
    handoffs: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def replay_check(events: Iterable[dict]) -> ReplayReport:
    report = ReplayReport()
    hosts: dict[str, set[str]] = {}
    bssids: dict[str, str] = {}
    last_iteration: Optional[int] = None

    def check_bssid(line: int, sta: Optional[str], bssid: Optional[str]) -> None:
        if not sta or not bssid:
            return
        known = bssids.setdefault(sta, bssid)
        if known != bssid:
            report.violations.append(
                Violation("bssid-stability", f"{sta} bssid changed {known} -> {bssid}", line)
            )

    for line, event in enumerate(events, start=1):
        report.events += 1
        kind = event.get("event")
        check_bssid(line, event.get("sta"), event.get("bssid"))

        if kind == "lvap_added":
            held = hosts.setdefault(event["sta"], set())
            held.add(event["ap"])
            if len(held) > 2:
                report.violations.append(
                    Violation(
                        "single-host",
                        f"{event['sta']} hosted by {len(held)} agents: {sorted(held)}",
                        line,
                    )
                )
        elif kind == "lvap_removed":
            hosts.get(event["sta"], set()).discard(event["ap"])
        elif kind == "agent_disconnected":
            for held in hosts.values():
                held.discard(event["ip"])
        elif kind == "handoff":
            report.handoffs += 1
            if str(event.get("outcome", "")).startswith("committed"):
                held = hosts.get(event["sta"], set())
                if len(held) != 1:
                    report.violations.append(
                        Violation(
                            "single-host",
                            f"{event['sta']} hosted by {sorted(held)} after committed handoff",
                            line,
                        )
                    )
        elif kind == "iteration":
            report.iterations += 1
            n = event.get("iteration")
            if last_iteration is not None and n is not None and n != last_iteration + 1:
                report.violations.append(
                    Violation("iteration-order", f"iteration {n} after {last_iteration}", line)
                )
            last_iteration = n if n is not None else last_iteration
            interval = event.get("scan_interval")
            duration = event.get("duration_s")
            if interval is not None and interval > LOOP_CEILING_S:
                report.violations.append(
                    Violation("loop-budget", f"scan_interval {interval}s exceeds 2s ceiling", line)
                )
            if duration is not None and interval is not None and duration >= interval:
                report.violations.append(
                    Violation(
                        "loop-budget",
                        f"iteration took {duration:.3f}s with scan_interval {interval}s",
                        line,
                    )
                )

    if report.events == 0:
        report.warnings.append("log contains no events; invariants hold vacuously")
    return report


def read_log(path: str | Path) -> list[dict]:
    events = []
    with open(path) as fh:
        for n, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                events.append(json.loads(raw))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{n}: not valid JSON: {exc}") from exc
    return events


def check_log_file(path: str | Path) -> ReplayReport:
    return replay_check(read_log(path))


def strip_volatile(event: dict) -> dict:
    """Copy of an event without fields that vary between identical runs."""
    return {k: v for k, v in event.items() if k not in VOLATILE_KEYS}
