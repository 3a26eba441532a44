"""Per-payload cumulative series, the Pearson coefficient and maneuver association.

For every distinct movement payload the series holds ``(t_i, c_i)``: the
number of frames carrying that payload with timestamp strictly before the
bucket edge ``t_i``.  A held stick command shows up as a run of growing
buckets; its onset is matched against externally observed maneuvers and
accepted when the growth inside the padded run is linear (``r`` above the
threshold).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from ..captureio import CaptureRecord
from ..framing import MOVEMENT_LENGTH, MOVEMENT_OFFSET, CommandId
from ..linkproto import dot11


class NoMatchingFrames(LookupError):
    pass


class DegenerateVariance(ValueError):
    pass


class NoConfidentAssociation(LookupError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    bucket_s: float = 0.5
    pad_s: float = 0.5
    threshold: float = 0.9
    noise_floor: int = 5


@dataclass(frozen=True)
class PayloadSeries:
    payload: bytes
    points: Tuple[Tuple[float, int], ...]

    @property
    def total(self) -> int:
        return self.points[-1][1] if self.points else 0

    def count_at(self, t: float) -> int:
        """Cumulative count at the last edge not after ``t``."""
        idx = bisect.bisect_right([p[0] for p in self.points], t + 1e-9) - 1
        return self.points[idx][1] if idx >= 0 else 0

    def window(self, start: float, end: float) -> List[Tuple[float, int]]:
        return [p for p in self.points if start - 1e-9 <= p[0] <= end + 1e-9]

    def runs(self) -> List[Tuple[float, float, int]]:
        """Maximal runs of growing buckets as (onset, end, growth)."""
        out = []
        prev_t, prev_c = None, 0
        start = None
        growth = 0
        for t, c in self.points:
            if prev_t is None:
                prev_t, prev_c = t, c
                if c > 0:
                    start, growth = t, c
                continue
            if c > prev_c:
                if start is None:
                    start, growth = prev_t, 0
                growth += c - prev_c
            elif start is not None:
                out.append((start, prev_t, growth))
                start = None
            prev_t, prev_c = t, c
        if start is not None:
            out.append((start, prev_t, growth))
        return out


def _movement_payloads(capture: Iterable[CaptureRecord], length: int):
    for rec in capture:
        try:
            frame = dot11.parse_dot11(rec.frame)
        except dot11.MalformedFrame:
            continue
        if not frame.is_data or frame.protected:
            continue
        parsed = dot11.parse_plaintext(frame.body)
        if isinstance(parsed, dot11.UdpDatagram) and len(parsed.payload) == length:
            yield rec.ts_us, parsed.payload[MOVEMENT_OFFSET : MOVEMENT_OFFSET + MOVEMENT_LENGTH]


def build_series(
    capture: Iterable[CaptureRecord], length: int = 0x3C, cfg: AnalysisConfig = AnalysisConfig()
) -> List[PayloadSeries]:
    """One cumulative series per movement payload seen in decrypted frames of ``length``."""
    by_payload = {}
    last = 0
    for ts, payload in _movement_payloads(capture, length):
        by_payload.setdefault(payload, []).append(ts)
        last = max(last, ts)
    if not by_payload:
        raise NoMatchingFrames(f"no decrypted UDP payloads of length {length}")
    bucket_us = round(cfg.bucket_s * 1e6)
    n_edges = last // bucket_us + 1
    edges = [bucket_us * (k + 1) for k in range(n_edges)]
    series = []
    for payload in sorted(by_payload):
        stamps = sorted(by_payload[payload])
        if len(stamps) < cfg.noise_floor:
            continue
        points = tuple((edge / 1e6, bisect.bisect_left(stamps, edge)) for edge in edges)
        series.append(PayloadSeries(payload, points))
    return series


def pearson(series, window: Optional[Tuple[float, float]] = None) -> float:
    """Sample correlation of c against t over the points inside ``window``."""
    points = series.points if isinstance(series, PayloadSeries) else list(series)
    if window is not None:
        lo, hi = window
        points = [p for p in points if lo - 1e-9 <= p[0] <= hi + 1e-9]
    n = len(points)
    if n < 2:
        raise DegenerateVariance("need at least two points")
    t_bar = sum(p[0] for p in points) / n
    c_bar = sum(p[1] for p in points) / n
    dt = [p[0] - t_bar for p in points]
    dc = [p[1] - c_bar for p in points]
    stt = sum(x * x for x in dt)
    scc = sum(y * y for y in dc)
    if stt == 0 or scc == 0:
        raise DegenerateVariance("zero variance in t or c")
    r = sum(x * y for x, y in zip(dt, dc)) / math.sqrt(stt * scc)
    return max(-1.0, min(1.0, r))


# ------------------------------------------------------------ association

MANEUVER_COMMAND = {
    "PropellerOn": CommandId.Ready,
    "TakeOff": CommandId.FullUp,
    "Up": CommandId.FullUp,
    "Landing": CommandId.FullDown,
    "Down": CommandId.FullDown,
    "Forward": CommandId.FullForward,
    "Backward": CommandId.FullBackward,
    "Left": CommandId.FullFlyLeft,
    "Right": CommandId.FullFlyRight,
    "RotateLeft": CommandId.FullRotateLeft,
    "RotateRight": CommandId.FullRotateRight,
    "Hover": CommandId.Idle,
}


@dataclass(frozen=True)
class Association:
    payload: bytes
    maneuver: str
    r: float
    onset: float

    def to_json(self) -> dict:
        return {"payload": self.payload.hex(), "maneuver": self.maneuver, "r": self.r, "onset": self.onset}


@dataclass(frozen=True)
class CorrelationReport:
    associations: Tuple[Association, ...]
    idle_payload: Optional[bytes] = None
    skipped: Tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "idle_payload": self.idle_payload.hex() if self.idle_payload else None,
            "associations": [a.to_json() for a in self.associations],
            "skipped": list(self.skipped),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CorrelationReport":
        assoc = tuple(
            Association(bytes.fromhex(a["payload"]), a["maneuver"], float(a["r"]), float(a["onset"]))
            for a in doc["associations"]
        )
        idle = doc.get("idle_payload")
        return cls(assoc, bytes.fromhex(idle) if idle else None, tuple(doc.get("skipped", ())))


def _intervals(observations: Sequence, end: float) -> List[Tuple[object, float]]:
    obs = sorted(observations, key=lambda o: o.t)
    return [(o, obs[i + 1].t if i + 1 < len(obs) else end) for i, o in enumerate(obs)]


def _growth(series: PayloadSeries, start: float, end: float) -> int:
    return series.count_at(end) - series.count_at(start)


def associate(
    series: Sequence[PayloadSeries], observations: Sequence, cfg: AnalysisConfig = AnalysisConfig()
) -> CorrelationReport:
    if not observations:
        raise NoConfidentAssociation("no observations")
    if not series:
        raise NoConfidentAssociation("no payload series")
    end = max(s.points[-1][0] for s in series)
    spans = _intervals(observations, end)

    hover = [(o.t, e) for o, e in spans if o.maneuver == "Hover" and e > o.t]
    if hover:
        idle = max(series, key=lambda s: (sum(_growth(s, a, b) for a, b in hover), s.total))
    else:
        idle = max(series, key=lambda s: s.total)

    assoc: List[Association] = []
    skipped: List[str] = []
    used = set()
    for obs, _ in spans:
        if obs.maneuver == "Hover":
            continue
        best = None
        for s in series:
            if s.payload == idle.payload:
                continue
            for onset, stop, growth in s.runs():
                if (s.payload, onset) in used:
                    continue
                if not obs.t - cfg.pad_s - cfg.bucket_s <= onset <= obs.t + cfg.pad_s:
                    continue
                key = (growth, -abs(onset - obs.t))
                if best is None or key > best[0]:
                    best = (key, s, onset, stop)
        if best is None:
            skipped.append(f"{obs.maneuver}@{obs.t:g}")
            continue
        _, s, onset, stop = best
        try:
            r = pearson(s, (onset - cfg.pad_s, stop + cfg.pad_s))
        except DegenerateVariance:
            skipped.append(f"{obs.maneuver}@{obs.t:g}")
            continue
        if r < cfg.threshold:
            skipped.append(f"{obs.maneuver}@{obs.t:g}")
            continue
        used.add((s.payload, onset))
        assoc.append(Association(s.payload, obs.maneuver, r, obs.t))

    for a, b in sorted(hover, key=lambda ab: ab[0] - ab[1]):
        try:
            r = pearson(idle, (a, b))
        except DegenerateVariance:
            continue
        if r >= cfg.threshold:
            assoc.append(Association(idle.payload, "Hover", r, a))
            break

    if not assoc:
        raise NoConfidentAssociation("no maneuver correlated above the threshold")
    assoc.sort(key=lambda a: (a.onset, a.maneuver))
    return CorrelationReport(tuple(assoc), idle.payload, tuple(skipped))


def series_csv(series: Sequence[PayloadSeries]) -> str:
    """Plot-ready CSV: one row per bucket edge, one column per payload."""
    if not series:
        return "t\n"
    lines = ["t," + ",".join(s.payload.hex() for s in series)]
    for idx, (t, _) in enumerate(series[0].points):
        lines.append(f"{t:g}," + ",".join(str(s.points[idx][1]) for s in series))
    return "\n".join(lines) + "\n"
