"""Controller/agent wire protocol: message vocabulary and frame codec.

Frame layout (documented byte-exactly in docs/wire-protocol.md):

    +----------------+---------------------------------------+
    | length (4B BE) | body: canonical JSON, UTF-8           |
    +----------------+---------------------------------------+

The body is ``{"kind": ..., "payload": {...}, "seq": ...}`` serialized
with sorted keys and compact separators, so encoding is deterministic:
the same message always produces the same bytes. Request seq numbers
increase strictly per direction; every response carries the seq of the
request it terminates.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Any

LENGTH_PREFIX_SIZE = 4
MAX_BODY_SIZE = 16 * 1024 * 1024

HELLO = "HELLO"
PING = "PING"
PONG = "PONG"
ADD_LVAP = "ADD_LVAP"
REMOVE_LVAP = "REMOVE_LVAP"
SET_CHANNEL = "SET_CHANNEL"
SCAN_REQUEST = "SCAN_REQUEST"
SCAN_REPORT = "SCAN_REPORT"
BUSY = "BUSY"
ACK = "ACK"
ERROR = "ERROR"

# kind -> {field: allowed types}; every listed field is required and no
# extra fields are accepted. Nested structures are validated shallowly
# here and semantically by the agent/engine layers.
_NUMBER = (int, float)
SCHEMAS: dict[str, dict[str, Any]] = {
    HELLO: {"ip": str, "mac": str, "channel": int, "capabilities": list},
    PING: {},
    PONG: {},
    ADD_LVAP: {"sta_mac": str, "bssid": str, "ssid": str},
    REMOVE_LVAP: {"sta_mac": str},
    SET_CHANNEL: {"channel": int},
    SCAN_REQUEST: {"channel": int, "duration": _NUMBER},
    SCAN_REPORT: {"ap_ip": str, "channel": int, "timestamp": _NUMBER, "observations": list},
    BUSY: {"last_report": (dict, type(None))},
    ACK: {},
    ERROR: {"code": str, "message": str},
}

REQUEST_KINDS = frozenset({HELLO, PING, ADD_LVAP, REMOVE_LVAP, SET_CHANNEL, SCAN_REQUEST})
RESPONSE_KINDS = frozenset({PONG, SCAN_REPORT, BUSY, ACK, ERROR})


class EncodeError(ValueError):
    """Message does not match its kind's payload schema."""


class ProtocolError(ValueError):
    """Malformed frame; the connection should be reset."""


class NeedMoreData(Exception):
    """The buffer does not yet hold a complete frame."""


@dataclass(frozen=True)
class ControlMessage:
    kind: str
    seq: int
    payload: dict[str, Any]

    def response_to(self, kind: str, payload: dict[str, Any] | None = None) -> "ControlMessage":
        return ControlMessage(kind=kind, seq=self.seq, payload=payload or {})


def validate_message(msg: ControlMessage) -> None:
    schema = SCHEMAS.get(msg.kind)
    if schema is None:
        raise EncodeError(f"unknown message kind: {msg.kind!r}")
    if not isinstance(msg.seq, int) or isinstance(msg.seq, bool) or msg.seq < 1:
        raise EncodeError(f"seq must be a positive integer, got {msg.seq!r}")
    if not isinstance(msg.payload, dict):
        raise EncodeError("payload must be a mapping")
    missing = set(schema) - set(msg.payload)
    if missing:
        raise EncodeError(f"{msg.kind} payload missing fields: {sorted(missing)}")
    extra = set(msg.payload) - set(schema)
    if extra:
        raise EncodeError(f"{msg.kind} payload has unknown fields: {sorted(extra)}")
    for name, types in schema.items():
        value = msg.payload[name]
        if isinstance(value, bool) and bool not in _as_tuple(types):
            raise EncodeError(f"{msg.kind}.{name}: wrong type {value!r}")
        if not isinstance(value, types):
            raise EncodeError(f"{msg.kind}.{name}: wrong type {value!r}")
        if isinstance(value, float) and not math.isfinite(value):
            raise EncodeError(f"{msg.kind}.{name}: must be finite")


def _as_tuple(types) -> tuple:
    return types if isinstance(types, tuple) else (types,)


def encode(msg: ControlMessage) -> bytes:
    """Length-prefixed canonical frame for `msg`; deterministic per message."""
    validate_message(msg)
    try:
        body = json.dumps(
            {"kind": msg.kind, "payload": msg.payload, "seq": msg.seq},
            sort_keys=True,
            separators=(",", ":"),
            allow_nan=False,
        ).encode("utf-8")
    except (TypeError, ValueError) as exc:
        raise EncodeError(f"payload is not JSON-serializable: {exc}") from exc
    if len(body) > MAX_BODY_SIZE:
        raise EncodeError(f"frame body too large: {len(body)} bytes")
    return struct.pack(">I", len(body)) + body


def decode(data: bytes) -> tuple[ControlMessage, bytes]:
    """Decode one frame from the head of `data`.

    Returns (message, remaining bytes). Raises NeedMoreData when the
    buffer is shorter than a full frame and ProtocolError when the frame
    cannot be a valid encoding.
    """
    if len(data) < LENGTH_PREFIX_SIZE:
        raise NeedMoreData
    (length,) = struct.unpack(">I", data[:LENGTH_PREFIX_SIZE])
    if length > MAX_BODY_SIZE:
        raise ProtocolError(f"declared body size {length} exceeds limit")
    end = LENGTH_PREFIX_SIZE + length
    if len(data) < end:
        raise NeedMoreData
    body = data[LENGTH_PREFIX_SIZE:end]
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"frame body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"kind", "payload", "seq"}:
        raise ProtocolError("frame body must be a {kind, payload, seq} object")
    msg = ControlMessage(kind=doc["kind"], seq=doc["seq"], payload=doc["payload"])
    try:
        validate_message(msg)
    except EncodeError as exc:
        raise ProtocolError(str(exc)) from exc
    return msg, data[end:]


class FrameDecoder:
    """Incremental decoder for a byte stream of frames."""

    def __init__(self):
        self._buffer = b""

    def feed(self, data: bytes) -> list[ControlMessage]:
        self._buffer += data
        messages = []
        while True:
            try:
                msg, self._buffer = decode(self._buffer)
            except NeedMoreData:
                return messages
            messages.append(msg)

    def pending_bytes(self) -> int:
        return len(self._buffer)
