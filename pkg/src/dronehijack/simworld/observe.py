"""External maneuver observation derived from the drone's motion state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .kinematics import DroneBody

MANEUVERS = (
    "PropellerOn",
    "TakeOff",
    "Forward",
    "Backward",
    "Left",
    "Right",
    "Up",
    "Down",
    "RotateLeft",
    "RotateRight",
    "Landing",
    "Hover",
)

MOVING_SPEED = 0.5  # m/s; below this a braking drone counts as hovering


@dataclass(frozen=True)
class ObservationEvent:
    t: float
    maneuver: str

    def to_json(self) -> dict:
        return {"t": self.t, "maneuver": self.maneuver}


def motion_label(prev: DroneBody, body: DroneBody) -> Optional[str]:
    """What a ground observer would call the current motion, or None on the ground."""
    if body.vz > 0:
        return "Up"
    if body.vz < 0 or (prev.airborne and not body.airborne):
        return "Down"
    if not body.airborne:
        return None
    if body.yaw_rate > 0:
        return "RotateRight"
    if body.yaw_rate < 0:
        return "RotateLeft"
    if body.speed > MOVING_SPEED:
        fwd, right = body.body_frame_velocity()
        if abs(fwd) >= abs(right):
            return "Forward" if fwd > 0 else "Backward"
        return "Right" if right > 0 else "Left"
    return "Hover"


class Observer:
    """Turns a sequence of body states into timestamped maneuver events."""

    def __init__(self) -> None:
        self.events: List[ObservationEvent] = []
        self._label: Optional[str] = None
        self._climb_from_ground = False

    def update(self, t: float, prev: DroneBody, body: DroneBody) -> None:
        if body.propellers and not prev.propellers:
            self.events.append(ObservationEvent(t, "PropellerOn"))
        label = motion_label(prev, body)
        if label == self._label:
            if label == "Down" and not body.airborne:
                self._touchdown()
            return
        if label == "Up" and not prev.airborne:
            self.events.append(ObservationEvent(t, "TakeOff"))
        elif label is not None:
            self.events.append(ObservationEvent(t, label))
        if label == "Down" and not body.airborne:
            self._touchdown()
        self._label = label

    def _touchdown(self) -> None:
        # a descent that ends on the ground is a landing
        for idx in range(len(self.events) - 1, -1, -1):
            ev = self.events[idx]
            if ev.maneuver == "Down":
                self.events[idx] = ObservationEvent(ev.t, "Landing")
                break
            if ev.maneuver == "Landing":
                break
        self._label = None
