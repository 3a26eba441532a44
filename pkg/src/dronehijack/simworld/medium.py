"""Virtual clock and broadcast radio medium.

Every frame is delivered instantly to all other stations and taps tuned to
the sender's channel.  Each (path, receiver) pair draws its own Bernoulli
loss from an RNG derived from the medium seed, so adding a tap never
changes what the drone hears.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..captureio import CaptureRecord
from ..linkproto.config import CHANNELS_5GHZ

LOSS_PATHS = ("link", "tap", "inject")


class NoSuchChannel(ValueError):
    pass


class VirtualClock:
    def __init__(self, now_us: int = 0) -> None:
        self._now = now_us

    @property
    def now(self) -> int:
        return self._now

    @property
    def seconds(self) -> float:
        return self._now / 1e6

    def advance(self, delta_us: int) -> int:
        if delta_us < 0:
            raise ValueError("virtual time is monotone")
        self._now += delta_us
        return self._now


@dataclass
class Station:
    name: str
    role: str  # "drone", "rc" or "attacker"
    channel: int
    inbox: List[Tuple[int, bytes]] = field(default_factory=list)
    sent: int = 0

    def drain(self) -> List[Tuple[int, bytes]]:
        out, self.inbox = self.inbox, []
        return out


class Tap:
    """Passive monitor: copies of every frame on one channel, never injects."""

    def __init__(self, channel: int, rng: random.Random, loss: float) -> None:
        self.channel = channel
        self.records: List[CaptureRecord] = []
        self._rng = rng
        self._loss = loss

    def _offer(self, ts: int, raw: bytes) -> None:
        if self._loss and self._rng.random() < self._loss:
            return
        self.records.append(CaptureRecord(ts, self.channel, raw))


class Medium:
    def __init__(
        self,
        clock: VirtualClock,
        seed: int = 0,
        loss: Dict[str, float] = None,
        channels=CHANNELS_5GHZ,
    ) -> None:
        self.clock = clock
        self.seed = seed
        self.loss = {path: 0.0 for path in LOSS_PATHS}
        for path, p in (loss or {}).items():
            if path not in self.loss or not 0.0 <= p <= 1.0:
                raise ValueError(f"bad loss entry {path}={p}")
            self.loss[path] = float(p)
        self.channels = tuple(channels)
        self.stations: List[Station] = []
        self.taps: Dict[int, List[Tap]] = {}
        self._rngs: Dict[str, random.Random] = {}
        self.on_air = 0

    def _rng(self, label: str) -> random.Random:
        rng = self._rngs.get(label)
        if rng is None:
            rng = self._rngs[label] = random.Random(f"{self.seed}:{label}")
        return rng

    def add_station(self, name: str, role: str, channel: int) -> Station:
        if channel not in self.channels:
            raise NoSuchChannel(channel)
        if any(s.name == name for s in self.stations):
            raise ValueError(f"duplicate station {name}")
        station = Station(name, role, channel)
        self.stations.append(station)
        return station

    def attach_tap(self, channel: int) -> Tap:
        if channel not in self.channels:
            raise NoSuchChannel(channel)
        taps = self.taps.setdefault(channel, [])
        tap = Tap(channel, self._rng(f"tap:{channel}:{len(taps)}"), self.loss["tap"])
        taps.append(tap)
        return tap

    def tune(self, station: Station, channel: int) -> None:
        if channel not in self.channels:
            raise NoSuchChannel(channel)
        station.channel = channel

    @staticmethod
    def path_for(sender: Station, receiver: Station) -> str:
        if sender.role == "attacker":
            return "inject"
        if receiver.role == "attacker":
            return "tap"
        return "link"

    def transmit(self, sender: Station, raw: bytes) -> None:
        ts = self.clock.now
        raw = bytes(raw)
        sender.sent += 1
        self.on_air += 1
        for tap in self.taps.get(sender.channel, ()):
            tap._offer(ts, raw)
        for receiver in self.stations:
            if receiver is sender or receiver.channel != sender.channel:
                continue
            path = self.path_for(sender, receiver)
            p = self.loss[path]
            if p and self._rng(f"{path}:{receiver.name}").random() < p:
                continue
            receiver.inbox.append((ts, raw))
