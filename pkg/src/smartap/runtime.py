"""Wires a scenario into a running system: env, agents, controller, engine.

The loop driver owns time. In the default (fast) mode each iteration
advances the simulated clock by the scan interval, so a 30-second
scenario runs in milliseconds and fixed seeds reproduce identical event
logs. With realtime=True the clock is the wall clock and iterations are
paced to start every scan interval, which is what the dashboard expects
of a live system.
"""

from __future__ import annotations

import dataclasses
import threading
import time
from typing import Optional

from .agent import ApAgent
from .engine import SelectionEngine
from .events import EventLog
from .gateway import DataGateway
from .links import AgentRunner, Controller, ControlServer, connect_inproc, connect_tcp
from .params import Parameters, parameters_from_overrides
from .radio import RadioEnvironment, SimClock, WallClock
from .scenario import Scenario


class SystemRuntime:
    """One scenario's worth of agents plus the controller stack."""

    def __init__(
        self,
        scenario: Scenario,
        *,
        realtime: bool = False,
        transport: str = "inproc",
        log_path: Optional[str] = None,
        seed: Optional[int] = None,
    ):
        if transport not in ("inproc", "tcp"):
            raise ValueError(f"unknown transport {transport!r}")
        if seed is not None:
            scenario = dataclasses.replace(scenario, seed=seed)
        self.scenario = scenario
        self.realtime = realtime
        self.transport = transport
        self.clock = WallClock() if realtime else SimClock()
        self.log = EventLog(log_path)
        self.env = RadioEnvironment(scenario, clock=self.clock)
        self.gateway = DataGateway(clock=self.clock)
        self.controller = Controller(self.clock, events=self.log.emit)
        self.engine = SelectionEngine(
            self.controller,
            self.gateway,
            self.clock,
            ssid=scenario.ssid,
            events=self.log.emit,
            params=parameters_from_overrides(scenario.params),
        )
        self.agents = [
            ApAgent(self.env, ap.ip, ap.mac, ap.channel) for ap in scenario.aps
        ]
        self._runners: list[AgentRunner] = []
        self._server: Optional[ControlServer] = None
        self._stop = threading.Event()
        self._loop_thread: Optional[threading.Thread] = None
        self._started = False

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "SystemRuntime":
        """Boot tables, connect every agent, apply scenario pre-associations."""
        if self._started:
            return self
        self._started = True
        self.engine.initialize()
        self.log.emit(
            {
                "event": "run_started",
                "seed": self.scenario.seed,
                "ssid": self.scenario.ssid,
                "aps": [ap.ip for ap in self.scenario.aps],
                "stations": [sta.mac for sta in self.scenario.stations],
                "params": self.engine.params.to_dict(),
                "realtime": self.realtime,
            }
        )
        if self.transport == "tcp":
            self._server = ControlServer(self.controller)
            for agent in self.agents:
                self._runners.append(connect_tcp(agent, self._server.host, self._server.port))
        else:
            for agent in self.agents:
                self._runners.append(connect_inproc(self.controller, agent))
        self._wait_for_agents()
        for sta in self.scenario.stations:
            if sta.initial_ap is not None:
                self.engine.associate(sta.mac, sta.initial_ap, reason="scenario")
        return self

    def _wait_for_agents(self, timeout: float = 5.0) -> None:
        deadline = time.monotonic() + timeout
        want = len(self.agents)
        while time.monotonic() < deadline:
            if len(self.controller.connected_agents()) >= want:
                return
            time.sleep(0.005)
        raise RuntimeError(
            f"only {len(self.controller.connected_agents())}/{want} agents connected"
        )

    def stop(self) -> None:
        self._stop.set()
        if self._loop_thread and self._loop_thread.is_alive():
            self._loop_thread.join(timeout=5.0)
        for runner in self._runners:
            runner.stop()
        if self._server:
            self._server.close()
        self.log.emit({"event": "run_stopped", "sim_time": self.clock.now()})
        self.log.close()

    # -- loop driving -----------------------------------------------------------

    def step(self) -> None:
        """One iteration plus the clock advance to the next loop boundary."""
        self.engine.run_iteration()
        if not self.realtime:
            self.clock.advance(self.engine.params.scan_interval)

    def run(self, duration: Optional[float] = None) -> None:
        """Iterate until `duration` (sim or wall seconds) or stop() is called."""
        next_deadline = self.clock.now()
        while not self._stop.is_set():
            if duration is not None and self.clock.now() >= duration:
                break
            if self.realtime:
                next_deadline += self.engine.params.scan_interval
            self.step()
            if self.realtime and not self._stop.is_set():
                time.sleep(max(0.0, next_deadline - self.clock.now()))

    def run_in_thread(self, duration: Optional[float] = None) -> threading.Thread:
        self._loop_thread = threading.Thread(
            target=self.run, kwargs={"duration": duration}, daemon=True, name="selection-loop"
        )
        self._loop_thread.start()
        return self._loop_thread
