"""Controller/agent connections over the frame protocol.

Agents dial the controller and introduce themselves with HELLO; after
that the controller is the only side issuing requests, and the agent
answers each one in arrival order. Both an in-process stream (tests,
single-process runs) and TCP are supported; both carry the exact same
frames through the codec.

A request that times out (500 ms) marks the agent disconnected and it is
excluded from the loop until it re-HELLOs, at which point it comes back
with a fresh LVAP table.
"""

from __future__ import annotations

import itertools
import queue
import socket
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from . import protocol
from .agent import ApAgent, Lvap, ScanReport

REQUEST_TIMEOUT_S = 0.5
HANDSHAKE_TIMEOUT_S = 5.0
RECONNECT_DELAY_S = 0.2


class LinkClosed(ConnectionError):
    """Peer went away or the stream was shut down."""


class AgentUnreachable(Exception):
    """No connected link for the agent, or it failed to answer in time."""


class AgentBusy(Exception):
    """Agent refused a scan; `cached` holds its last report, if any."""

    def __init__(self, cached: Optional[ScanReport]):
        self.cached = cached
        super().__init__("agent busy")


class AgentCommandError(Exception):
    """Agent answered with an ERROR message."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class QueueStream:
    """One end of an in-process byte pipe."""

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox
        self._closed = False

    def send_bytes(self, data: bytes) -> None:
        if self._closed:
            raise LinkClosed("stream closed")
        self._outbox.put(data)

    def recv_bytes(self, timeout: Optional[float] = None) -> bytes:
        if self._closed:
            raise LinkClosed("stream closed")
        try:
            item = self._inbox.get(timeout=timeout)
        except queue.Empty:
            raise LinkClosed("recv timed out") from None
        if item is None:
            self._closed = True
            raise LinkClosed("peer closed")
        return item

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._outbox.put(None)
            self._inbox.put(None)


def inproc_pair() -> tuple[QueueStream, QueueStream]:
    a_to_b: queue.Queue = queue.Queue()
    b_to_a: queue.Queue = queue.Queue()
    return QueueStream(b_to_a, a_to_b), QueueStream(a_to_b, b_to_a)


class SocketStream:
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._send_lock = threading.Lock()

    def send_bytes(self, data: bytes) -> None:
        try:
            with self._send_lock:
                self._sock.sendall(data)
        except OSError as exc:
            raise LinkClosed(str(exc)) from exc

    def recv_bytes(self, timeout: Optional[float] = None) -> bytes:
        try:
            self._sock.settimeout(timeout)
            chunk = self._sock.recv(65536)
        except socket.timeout:
            raise LinkClosed("recv timed out") from None
        except OSError as exc:
            raise LinkClosed(str(exc)) from exc
        if not chunk:
            raise LinkClosed("peer closed")
        return chunk

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


@dataclass
class AgentInfo:
    ip: str
    mac: str
    channel: int
    connected: bool
    last_heartbeat: float


class _Waiter:
    __slots__ = ("event", "message")

    def __init__(self):
        self.event = threading.Event()
        self.message: Optional[protocol.ControlMessage] = None


class _AgentLink:
    """Controller-side request/response machinery for one agent stream."""

    def __init__(self, stream):
        self.stream = stream
        self._seq = itertools.count(1)
        self._pending: dict[int, _Waiter] = {}
        self._lock = threading.Lock()
        self.closed = False

    def send_request(self, kind: str, payload: dict) -> tuple[int, _Waiter]:
        with self._lock:
            if self.closed:
                raise LinkClosed("link closed")
            seq = next(self._seq)
            waiter = _Waiter()
            self._pending[seq] = waiter
        self.stream.send_bytes(protocol.encode(protocol.ControlMessage(kind, seq, payload)))
        return seq, waiter

    def resolve(self, msg: protocol.ControlMessage) -> bool:
        with self._lock:
            waiter = self._pending.pop(msg.seq, None)
        if waiter is None:
            return False
        waiter.message = msg
        waiter.event.set()
        return True

    def forget(self, seq: int) -> None:
        with self._lock:
            self._pending.pop(seq, None)

    def close(self) -> None:
        with self._lock:
            self.closed = True
            pending = list(self._pending.values())
            self._pending.clear()
        for waiter in pending:
            waiter.event.set()
        self.stream.close()


class Controller:
    """Connection registry plus the command verbs the loop needs."""

    def __init__(self, clock, events: Optional[Callable[[dict], None]] = None):
        self.clock = clock
        self._events = events
        self._agents: dict[str, AgentInfo] = {}
        self._links: dict[str, _AgentLink] = {}
        self._lock = threading.Lock()

    # -- connection management -------------------------------------------

    def attach_stream(self, stream) -> None:
        """Adopt a new agent stream; the handshake runs on its reader thread."""
        threading.Thread(target=self._reader, args=(stream,), daemon=True).start()

    def _reader(self, stream) -> None:
        decoder = protocol.FrameDecoder()
        link = _AgentLink(stream)
        ip: Optional[str] = None
        try:
            while True:
                for msg in decoder.feed(stream.recv_bytes(timeout=HANDSHAKE_TIMEOUT_S if ip is None else None)):
                    if ip is None:
                        if msg.kind != protocol.HELLO:
                            raise protocol.ProtocolError("first message must be HELLO")
                        ip = self._register(msg, link)
                    elif not link.resolve(msg):
                        raise protocol.ProtocolError(f"response with unknown seq {msg.seq}")
                    else:
                        self._touch(ip)
        except (LinkClosed, protocol.ProtocolError, OSError):
            pass
        finally:
            link.close()
            if ip is not None:
                self._drop(ip, link)

    def _register(self, hello: protocol.ControlMessage, link: _AgentLink) -> str:
        payload = hello.payload
        ip = payload["ip"]
        info = AgentInfo(
            ip=ip,
            mac=payload["mac"],
            channel=payload["channel"],
            connected=True,
            last_heartbeat=self.clock.now(),
        )
        # ACK before registering: once the link is visible, another thread may
        # write a request, and the agent must see the ACK first on the stream
        link.stream.send_bytes(protocol.encode(hello.response_to(protocol.ACK)))
        with self._lock:
            old = self._links.get(ip)
            self._links[ip] = link
            self._agents[ip] = info
        if old is not None:
            old.close()
        self._emit({"event": "agent_connected", "ip": ip, "mac": info.mac, "channel": info.channel})
        return ip

    def _drop(self, ip: str, link: _AgentLink) -> None:
        with self._lock:
            if self._links.get(ip) is not link:
                return  # superseded by a re-HELLO
            del self._links[ip]
            info = self._agents.get(ip)
            was_connected = info.connected if info else False
            if info:
                info.connected = False
        if was_connected:
            self._emit({"event": "agent_disconnected", "ip": ip})

    def mark_disconnected(self, ip: str) -> None:
        with self._lock:
            link = self._links.pop(ip, None)
            info = self._agents.get(ip)
            was_connected = info.connected if info else False
            if info:
                info.connected = False
        if link is not None:
            link.close()
        if was_connected:
            self._emit({"event": "agent_disconnected", "ip": ip})

    def _touch(self, ip: str) -> None:
        with self._lock:
            info = self._agents.get(ip)
            if info:
                info.last_heartbeat = self.clock.now()

    def _emit(self, event: dict) -> None:
        if self._events:
            event.setdefault("sim_time", self.clock.now())
            self._events(event)

    # -- queries -----------------------------------------------------------

    def connected_agents(self) -> list[AgentInfo]:
        with self._lock:
            return sorted(
                (AgentInfo(**vars(a)) for a in self._agents.values() if a.connected),
                key=lambda a: a.ip,
            )

    def all_agents(self) -> list[AgentInfo]:
        with self._lock:
            return sorted((AgentInfo(**vars(a)) for a in self._agents.values()), key=lambda a: a.ip)

    def is_connected(self, ip: str) -> bool:
        with self._lock:
            info = self._agents.get(ip)
            return bool(info and info.connected)

    # -- commands ----------------------------------------------------------

    def request(
        self, ip: str, kind: str, payload: dict, timeout: float = REQUEST_TIMEOUT_S
    ) -> protocol.ControlMessage:
        with self._lock:
            link = self._links.get(ip)
            info = self._agents.get(ip)
            if link is None or info is None or not info.connected:
                raise AgentUnreachable(f"agent {ip} is not connected")
        try:
            seq, waiter = link.send_request(kind, payload)
        except LinkClosed:
            self.mark_disconnected(ip)
            raise AgentUnreachable(f"agent {ip} link closed") from None
        if not waiter.event.wait(timeout) or waiter.message is None:
            link.forget(seq)
            self.mark_disconnected(ip)
            raise AgentUnreachable(f"agent {ip} timed out after {timeout}s")
        msg = waiter.message
        if msg.kind == protocol.ERROR:
            raise AgentCommandError(msg.payload["code"], msg.payload["message"])
        return msg

    def ping(self, ip: str) -> None:
        self.request(ip, protocol.PING, {})

    def add_lvap(self, ip: str, lvap: Lvap) -> None:
        self.request(ip, protocol.ADD_LVAP, lvap.to_payload())

    def remove_lvap(self, ip: str, sta_mac: str) -> None:
        self.request(ip, protocol.REMOVE_LVAP, {"sta_mac": sta_mac})

    def set_channel(self, ip: str, channel: int) -> None:
        self.request(ip, protocol.SET_CHANNEL, {"channel": channel})
        with self._lock:
            info = self._agents.get(ip)
            if info:
                info.channel = channel

    def scan(self, ip: str, channel: int, duration: float) -> tuple[ScanReport, bool]:
        """Run a scan on the agent; returns (report, stale).

        stale=True means the agent was mid-scan and this is its cached last
        report. Raises AgentBusy when busy with nothing cached.
        """
        msg = self.request(ip, protocol.SCAN_REQUEST, {"channel": channel, "duration": duration})
        if msg.kind == protocol.BUSY:
            cached = msg.payload.get("last_report")
            if cached is None:
                raise AgentBusy(None)
            return ScanReport.from_payload(cached), True
        return ScanReport.from_payload(msg.payload), False


class ControlServer:
    """TCP listener that feeds accepted agent connections to the controller."""

    def __init__(self, controller: Controller, host: str = "127.0.0.1", port: int = 0):
        self.controller = controller
        self._sock = socket.create_server((host, port))
        self.host, self.port = self._sock.getsockname()[:2]
        self._closing = False
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._thread.start()

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            self.controller.attach_stream(SocketStream(conn))

    def close(self) -> None:
        self._closing = True
        try:
            self._sock.close()
        except OSError:
            pass
        self._thread.join(timeout=1.0)


class AgentRunner:
    """Runs one agent's command loop over a stream.

    `connect` yields a fresh stream per attempt; with reconnect=True the
    runner re-dials (and re-HELLOs) after a lost link until stopped.
    """

    def __init__(self, agent: ApAgent, connect: Callable[[], object], reconnect: bool = False):
        self.agent = agent
        self._connect = connect
        self._reconnect = reconnect
        self._stop = threading.Event()
        self._stream = None
        self._thread = threading.Thread(target=self._run, daemon=True, name=f"agent-{agent.ip}")

    def start(self) -> "AgentRunner":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        stream = self._stream
        if stream is not None:
            stream.close()
        self._thread.join(timeout=2.0)

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                stream = self._connect()
            except OSError:
                if not self._reconnect:
                    return
                time.sleep(RECONNECT_DELAY_S)
                continue
            self._stream = stream
            try:
                self._serve(stream)
            except (LinkClosed, protocol.ProtocolError, OSError):
                pass
            finally:
                self._stream = None
                stream.close()
            if not self._reconnect:
                return
            if not self._stop.is_set():
                time.sleep(RECONNECT_DELAY_S)

    def _serve(self, stream) -> None:
        self.agent.reset()
        hello_seq = 1
        own_seq = itertools.count(hello_seq)
        stream.send_bytes(
            protocol.encode(
                protocol.ControlMessage(protocol.HELLO, next(own_seq), self.agent.hello_payload())
            )
        )
        decoder = protocol.FrameDecoder()
        last_request_seq = 0
        while not self._stop.is_set():
            for msg in decoder.feed(stream.recv_bytes()):
                if msg.kind == protocol.ACK and msg.seq == hello_seq and last_request_seq == 0:
                    continue  # handshake complete
                if msg.kind not in protocol.REQUEST_KINDS:
                    raise protocol.ProtocolError(f"agent got non-request {msg.kind}")
                if msg.seq <= last_request_seq:
                    raise protocol.ProtocolError(
                        f"request seq {msg.seq} not above {last_request_seq}"
                    )
                last_request_seq = msg.seq
                stream.send_bytes(protocol.encode(self.agent.handle_message(msg)))


def connect_inproc(controller: Controller, agent: ApAgent) -> AgentRunner:
    agent_end, controller_end = inproc_pair()
    controller.attach_stream(controller_end)
    handed = [False]

    def connect_once():
        if handed[0]:
            raise OSError("in-process stream cannot reconnect")
        handed[0] = True
        return agent_end

    return AgentRunner(agent, connect_once).start()


def connect_tcp(agent: ApAgent, host: str, port: int, reconnect: bool = True) -> AgentRunner:
    def dial():
        sock = socket.create_connection((host, port), timeout=HANDSHAKE_TIMEOUT_S)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.settimeout(None)
        return SocketStream(sock)

    return AgentRunner(agent, dial, reconnect=reconnect).start()
