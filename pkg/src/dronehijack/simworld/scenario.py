"""Scripted scenarios and their JSON form.

Example document::

    {
      "seed": 7,
      "wep_key": "a1b2c3d4e5",
      "link": {"channel": 149},
      "channel_hopping": false,
      "loss": {"link": 0.0, "tap": 0.0, "inject": 0.0},
      "tap": true,
      "timeline": [{"t": 1.0, "command": "Ready", "duration": 1.0}],
      "end": 25.0,
      "arp_replay": {"start": 25.0, "count": 20000, "rate_hz": 500}
    }

``end`` defaults to two seconds after the last timeline entry.  The
optional ``arp_replay`` block adds an attacker that re-injects the first
ARP request it overhears, which makes the drone answer with fresh IVs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple

from ..framing import CommandId
from ..linkproto import dot11
from ..linkproto.config import CHANNELS_5GHZ, LinkConfig
from ..wepcrypt.wep import WepKey
from .kinematics import DroneBody
from .medium import LOSS_PATHS
from .world import World


class InvalidScript(ValueError):
    pass


@dataclass(frozen=True)
class ArpReplay:
    start: float
    count: int
    rate_hz: float = 500.0


@dataclass(frozen=True)
class ScenarioScript:
    wep_key: WepKey
    timeline: Tuple[Tuple[float, CommandId, float], ...] = ()
    link: dict = field(default_factory=dict)
    loss: dict = field(default_factory=dict)
    seed: int = 0
    tap: bool = True
    end: Optional[float] = None
    channel_hopping: bool = False
    arp_replay: Optional[ArpReplay] = None

    def __post_init__(self):
        last = float("-inf")
        for t, cmd, duration in self.timeline:
            if not isinstance(cmd, CommandId):
                raise InvalidScript(f"bad command {cmd!r}")
            if t < last:
                raise InvalidScript("timeline must be sorted by start time")
            if duration <= 0:
                raise InvalidScript("durations must be positive")
            if t < 0:
                raise InvalidScript("start times must be non-negative")
            last = t
        for path, p in self.loss.items():
            if path not in LOSS_PATHS or not 0.0 <= float(p) <= 1.0:
                raise InvalidScript(f"bad loss entry {path}={p}")
        if self.arp_replay and (self.arp_replay.count < 0 or self.arp_replay.rate_hz <= 0):
            raise InvalidScript("bad arp_replay block")
        try:
            self.link_config()
        except (TypeError, ValueError) as exc:
            raise InvalidScript(str(exc)) from exc

    def link_config(self) -> LinkConfig:
        opts = dict(self.link)
        if self.channel_hopping:
            opts["channel"] = random.Random(f"channel:{self.seed}").choice(CHANNELS_5GHZ)
        return LinkConfig(wep_key=self.wep_key, **opts)

    @property
    def end_time(self) -> float:
        if self.end is not None:
            return self.end
        last = max((t + d for t, _, d in self.timeline), default=0.0)
        end = last + 2.0
        if self.arp_replay:
            end = max(end, self.arp_replay.start + self.arp_replay.count / self.arp_replay.rate_hz + 0.5)
        return max(end, 3.0)

    def command_at(self, t: float) -> CommandId:
        cmd = CommandId.Idle
        for start, c, duration in self.timeline:
            if start <= t < start + duration - 1e-9:
                cmd = c
        return cmd

    # ------------------------------------------------------------ JSON

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioScript":
        try:
            timeline = tuple(
                (float(e["t"]), CommandId.parse(e["command"]), float(e["duration"])) for e in doc.get("timeline", [])
            )
            replay = doc.get("arp_replay")
            return cls(
                wep_key=WepKey.from_hex(doc["wep_key"]),
                timeline=timeline,
                link=dict(doc.get("link", {})),
                loss={k: float(v) for k, v in doc.get("loss", {}).items()},
                seed=int(doc.get("seed", 0)),
                tap=bool(doc.get("tap", True)),
                end=None if doc.get("end") is None else float(doc["end"]),
                channel_hopping=bool(doc.get("channel_hopping", False)),
                arp_replay=ArpReplay(float(replay["start"]), int(replay["count"]), float(replay.get("rate_hz", 500)))
                if replay
                else None,
            )
        except InvalidScript:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScript(f"malformed scenario: {exc}") from exc

    def to_dict(self) -> dict:
        doc = {
            "seed": self.seed,
            "wep_key": self.wep_key.hex(),
            "link": dict(self.link),
            "channel_hopping": self.channel_hopping,
            "loss": dict(self.loss),
            "tap": self.tap,
            "timeline": [{"t": t, "command": c.name, "duration": d} for t, c, d in self.timeline],
        }
        if self.end is not None:
            doc["end"] = self.end
        if self.arp_replay:
            doc["arp_replay"] = {
                "start": self.arp_replay.start,
                "count": self.arp_replay.count,
                "rate_hz": self.arp_replay.rate_hz,
            }
        return doc

    @classmethod
    def load(cls, path) -> "ScenarioScript":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidScript(f"{path}: {exc}") from exc
        return cls.from_dict(doc)

    def with_seed(self, seed: int) -> "ScenarioScript":
        doc = self.to_dict()
        doc["seed"] = seed
        return ScenarioScript.from_dict(doc)


class ScenarioResult(NamedTuple):
    capture: list
    observations: list
    final: DroneBody
    world: World


class ArpReplayer:
    """Overhears one encrypted ARP request and re-injects it verbatim."""

    def __init__(self, world: World, plan: ArpReplay) -> None:
        self.plan = plan
        self.station = world.add_station("arp-replayer")
        self.template: Optional[bytes] = None
        self.sent = 0

    def __call__(self, world: World) -> None:
        for _, raw in self.station.drain():
            if self.template is None:
                try:
                    kind = dot11.classify(raw).kind
                except dot11.MalformedFrame:
                    continue
                if kind is dot11.FrameKind.ArpRequest:
                    self.template = raw
        if self.template is None or self.sent >= self.plan.count:
            return
        t = world.now / 1e6
        if t < self.plan.start:
            return
        due = min(self.plan.count, int((t - self.plan.start) * self.plan.rate_hz) + 1)
        while self.sent < due:
            world.medium.transmit(self.station, self.template)
            self.sent += 1


def build_world(script: ScenarioScript) -> World:
    world = World(script.link_config(), seed=script.seed, loss=script.loss, monitor=script.tap)
    if script.arp_replay:
        world.agents.append(ArpReplayer(world, script.arp_replay))
    return world


def run_scenario(script: ScenarioScript) -> ScenarioResult:
    world = build_world(script)
    end_us = round(script.end_time * 1e6)
    while world.now < end_us:
        world.set_stick(script.command_at(world.now / 1e6))
        world.step()
    return ScenarioResult(world.capture, world.observations, world.body, world)
