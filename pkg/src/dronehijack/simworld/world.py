"""The scheduler: one drone, one controller, optional extra agents.

Each 20 ms tick runs, in order: the drone (inbox, flight command,
kinematics, beacons/telemetry), the controller, then registered agents.
Frames sent during a tick land in receivers' inboxes immediately and are
consumed at the receiver's next turn.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Tuple

from ..framing import CommandId, MovementField, classify_movement
from ..linkproto.config import LinkConfig, SessionConstants, reference_constants
from ..linkproto.drone import DroneLinkState, Received, Tick, drone_step, new_drone_state
from ..linkproto.rc import RcPhase, RcState, new_rc_state, power_off, rc_step, set_stick
from .kinematics import DroneBody, kinematics_step
from .medium import Medium, Station, Tap, VirtualClock
from .observe import Observer
from .telemetry import encode_telemetry

TICK_US = 20_000
TELEMETRY_EVERY = 4  # ticks, i.e. 12.5 Hz


class FlightController:
    """Latches the newest movement per peer and picks the active command.

    The active command is the most recently received non-Idle latch among
    connected peers, so an idle peer never cancels another peer's input.
    """

    def __init__(self) -> None:
        self.latches: Dict[bytes, Tuple[int, CommandId]] = {}
        self._arrivals = 0
        self.log: List[Tuple[int, bytes, MovementField]] = []

    def deliver(self, now: int, mac: bytes, movement: MovementField) -> None:
        self._arrivals += 1
        cmd = classify_movement(movement) or CommandId.Idle
        self.latches[mac] = (self._arrivals, cmd)
        self.log.append((now, mac, movement))

    def command(self, connected: List[bytes]) -> CommandId:
        best: Optional[Tuple[int, CommandId]] = None
        for mac in connected:
            latch = self.latches.get(mac)
            if latch and latch[1] is not CommandId.Idle and (best is None or latch[0] > best[0]):
                best = latch
        return best[1] if best else CommandId.Idle


class World:
    def __init__(
        self,
        cfg: LinkConfig,
        *,
        seed: int = 0,
        loss: Optional[dict] = None,
        rc_powered: bool = True,
        monitor: bool = True,
        constants: Optional[SessionConstants] = None,
        tick_us: int = TICK_US,
    ) -> None:
        self.cfg = cfg
        self.seed = seed
        self.tick_us = tick_us
        self.constants = constants or reference_constants()
        self.clock = VirtualClock()
        self.medium = Medium(self.clock, seed=seed, loss=loss)
        self.drone_station = self.medium.add_station("drone", "drone", cfg.channel)
        self.rc_station = self.medium.add_station("rc", "rc", cfg.channel)
        self.drone: DroneLinkState = new_drone_state(cfg, iv_salt=seed * 2 + 1)
        self.rc: RcState = new_rc_state(cfg, iv_salt=seed * 2 + 2, powered=rc_powered)
        self.body = DroneBody()
        self.observer = Observer()
        self.flight = FlightController()
        self.tap: Optional[Tap] = self.medium.attach_tap(cfg.channel) if monitor else None
        self.agents: List[Callable[["World"], None]] = []
        self.ticks = 0
        self.active_command = CommandId.Idle

    # ------------------------------------------------------------ stepping

    @property
    def now(self) -> int:
        return self.clock.now

    def add_station(self, name: str, role: str = "attacker", channel: Optional[int] = None) -> Station:
        return self.medium.add_station(name, role, self.cfg.channel if channel is None else channel)

    def set_stick(self, cmd: CommandId) -> None:
        if self.rc.stick is not cmd:
            self.rc = set_stick(self.rc, cmd)

    def power_off_rc(self) -> None:
        self.rc = power_off(self.rc)

    def power_on_rc(self) -> None:
        if self.rc.phase is RcPhase.Off:
            self.rc = new_rc_state(self.cfg, iv_salt=self.rc.iv_salt + 7919)

    def _send(self, station: Station, frames: list) -> None:
        for raw in frames:
            self.medium.transmit(station, raw)

    def _step_drone(self, now: int) -> None:
        cfg = self.cfg
        for _, raw in self.drone_station.drain():
            res = drone_step(self.drone, Received(raw), now, cfg)
            self.drone = res.state
            self._send(self.drone_station, res.emit)
            for mac, movement in res.delivered:
                self.flight.deliver(now, mac, movement)
        connected = [p.mac for p in self.drone.connected_peers]
        self.active_command = self.flight.command(connected)
        prev = self.body
        self.body = kinematics_step(prev, self.active_command, self.tick_us / 1e6)
        self.observer.update(now / 1e6, prev, self.body)
        telemetry = None
        if self.ticks % TELEMETRY_EVERY == 0:
            telemetry = encode_telemetry(now, self.body, cfg.crc)
        res = drone_step(self.drone, Tick(telemetry), now, cfg)
        self.drone = res.state
        self._send(self.drone_station, res.emit)

    def _step_rc(self, now: int) -> None:
        if self.rc.phase is RcPhase.Off:
            self.rc_station.drain()
            return
        for _, raw in self.rc_station.drain():
            res = rc_step(self.rc, Received(raw), now, self.cfg, self.constants)
            self.rc = res.state
            self._send(self.rc_station, res.emit)
        res = rc_step(self.rc, Tick(), now, self.cfg, self.constants)
        self.rc = res.state
        self._send(self.rc_station, res.emit)

    def step(self) -> None:
        now = self.clock.now
        self._step_drone(now)
        self._step_rc(now)
        for agent in list(self.agents):
            agent(self)
        self.ticks += 1
        self.clock.advance(self.tick_us)

    def run_until(self, t_us: int) -> None:
        while self.clock.now < t_us:
            self.step()

    def run_for(self, seconds: float) -> None:
        self.run_until(self.clock.now + round(seconds * 1e6))

    # --------------------------------------------------------- inspection

    @property
    def capture(self) -> list:
        return list(self.tap.records) if self.tap else []

    @property
    def observations(self) -> list:
        return list(self.observer.events)

    @property
    def delivered(self) -> list:
        return list(self.flight.log)
