"""In-memory data gateway between the control loop and the management API.

A table-structured record store created once at startup, before the first
scan: the engine writes a fresh snapshot every iteration, API handlers
read concurrently, and the mutation queues (parameter edits, manual
handoffs, channel changes) buffer client requests until the loop drains
them at its defined boundaries. Rows are replaced whole and handed out as
copies, so no reader ever sees a half-written record. Nothing survives a
restart.
"""

from __future__ import annotations

import copy
import threading
from dataclasses import dataclass
from typing import Any, Optional

from .params import ParamError, validate_param
from .scenario import ALLOWED_CHANNELS

NoneType = type(None)


class TableNotFound(KeyError):
    pass


class TableExists(ValueError):
    pass


class RowNotFound(KeyError):
    pass


class SchemaViolation(ValueError):
    pass


@dataclass(frozen=True)
class ParamChange:
    name: str
    value: Any
    requested_at: float


@dataclass(frozen=True)
class ManualHandoff:
    sta_mac: str
    target_ip: str
    requested_at: float


@dataclass(frozen=True)
class ChannelChange:
    ap_ip: str
    channel: int
    requested_at: float


# field -> allowed types; every field required, unknown fields rejected.
TABLE_SCHEMAS: dict[str, dict[str, Any]] = {
    "clients_ever": {
        "mac": str,
        "bssid": str,
        "first_seen": (int, float),
        "last_seen": (int, float),
        "connected": bool,
    },
    "stations_current": {
        "mac": str,
        "bssid": str,
        "host": str,
        "rssi": (int, float, NoneType),
    },
    "agents": {
        "ip": str,
        "mac": str,
        "channel": int,
        "lvap_count": int,
        "last_heartbeat": (int, float),
        "connected": bool,
    },
    "matrix": {
        "aps": list,
        "stas": list,
        "cells": list,
        "timestamp": (int, float),
    },
    "stats": {
        "ap": str,
        "timestamp": (int, float),
        "stations": list,
    },
    "params": {
        "alpha": (int, float),
        "scan_interval": (int, float),
        "hysteresis": (int, float),
        "load_penalty_beta": (int, float),
        "stale_scans_limit": int,
        "scan_duration": (int, float),
    },
    "last_scans": {
        "ap": str,
        "channel": int,
        "timestamp": (int, float),
        "observations": list,
        "stale": bool,
    },
    "loop": {
        "iteration": int,
        "sim_time": (int, float),
        "duration_s": (int, float),
        "scan_interval": (int, float),
        "reports": int,
        "handoffs": int,
        "associations": int,
    },
}


class _Table:
    def __init__(self, name: str, schema: dict, created_at: float):
        self.name = name
        self.schema = schema
        self.created_at = created_at
        self.rows: dict[str, dict] = {}


class DataGateway:
    """Thread-safe CRUD tables plus the loop-boundary mutation queues."""

    def __init__(self, clock=None):
        self._clock = clock
        self._tables: dict[str, _Table] = {}
        self._params_queue: list[ParamChange] = []
        self._handoff_queue: list[ManualHandoff] = []
        self._channel_queue: list[ChannelChange] = []
        self._lock = threading.RLock()

    def _now(self) -> float:
        return self._clock.now() if self._clock else 0.0

    # -- CRUD ---------------------------------------------------------------

    def create_table(self, name: str, schema: dict) -> None:
        with self._lock:
            if name in self._tables:
                raise TableExists(f"table {name!r} already exists")
            self._tables[name] = _Table(name, dict(schema), self._now())

    def table_names(self) -> list[str]:
        with self._lock:
            return sorted(self._tables)

    def put(self, table: str, key: str, record: dict) -> None:
        with self._lock:
            t = self._table(table)
            self._validate(t, record)
            t.rows[key] = copy.deepcopy(record)

    def get(self, table: str, key: str) -> dict:
        with self._lock:
            t = self._table(table)
            if key not in t.rows:
                raise RowNotFound(f"{table}[{key!r}] not found")
            return copy.deepcopy(t.rows[key])

    def list(self, table: str) -> list[dict]:
        with self._lock:
            t = self._table(table)
            return [copy.deepcopy(t.rows[k]) for k in sorted(t.rows)]

    def delete(self, table: str, key: str) -> bool:
        with self._lock:
            t = self._table(table)
            return t.rows.pop(key, None) is not None

    def keys(self, table: str) -> list[str]:
        with self._lock:
            return sorted(self._table(table).rows)

    def _table(self, name: str) -> _Table:
        t = self._tables.get(name)
        if t is None:
            raise TableNotFound(f"table {name!r} not found")
        return t

    @staticmethod
    def _validate(table: _Table, record: dict) -> None:
        if not isinstance(record, dict):
            raise SchemaViolation(f"{table.name}: record must be a mapping")
        missing = set(table.schema) - set(record)
        if missing:
            raise SchemaViolation(f"{table.name}: missing fields {sorted(missing)}")
        extra = set(record) - set(table.schema)
        if extra:
            raise SchemaViolation(f"{table.name}: unknown fields {sorted(extra)}")
        for name, types in table.schema.items():
            value = record[name]
            if isinstance(value, bool) and bool not in _type_tuple(types):
                raise SchemaViolation(f"{table.name}.{name}: wrong type {value!r}")
            if not isinstance(value, types):
                raise SchemaViolation(f"{table.name}.{name}: wrong type {value!r}")

    # -- mutation queues ------------------------------------------------------

    def enqueue_param_change(self, name: str, value) -> ParamChange:
        validated = validate_param(name, value)  # raises ParamError
        change = ParamChange(name=name, value=validated, requested_at=self._now())
        with self._lock:
            self._params_queue.append(change)
        return change

    def drain_param_changes(self) -> list[ParamChange]:
        with self._lock:
            drained, self._params_queue = self._params_queue, []
            return drained

    def peek_param_changes(self) -> list[ParamChange]:
        with self._lock:
            return list(self._params_queue)

    def enqueue_manual_handoff(self, sta_mac: str, target_ip: str) -> ManualHandoff:
        handoff = ManualHandoff(sta_mac=sta_mac, target_ip=target_ip, requested_at=self._now())
        with self._lock:
            self._handoff_queue.append(handoff)
        return handoff

    def drain_manual_handoffs(self) -> list[ManualHandoff]:
        with self._lock:
            drained, self._handoff_queue = self._handoff_queue, []
            return drained

    def enqueue_channel_change(self, ap_ip: str, channel: int) -> ChannelChange:
        if not isinstance(channel, int) or channel not in ALLOWED_CHANNELS:
            raise ParamError(f"channel must be an integer in 1..13, got {channel!r}")
        change = ChannelChange(ap_ip=ap_ip, channel=channel, requested_at=self._now())
        with self._lock:
            self._channel_queue.append(change)
        return change

    def drain_channel_changes(self) -> list[ChannelChange]:
        with self._lock:
            drained, self._channel_queue = self._channel_queue, []
            return drained


def _type_tuple(types) -> tuple:
    return types if isinstance(types, tuple) else (types,)


def init_tables(gateway: DataGateway) -> None:
    """Create the full table catalogue; must run before the first scan."""
    for name, schema in TABLE_SCHEMAS.items():
        gateway.create_table(name, schema)
