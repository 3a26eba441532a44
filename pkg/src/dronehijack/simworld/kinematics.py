"""Point-mass flight model driven by full-deflection stick commands.

Heading 0 points along +y and grows clockwise, so the body-forward unit
vector is ``(sin h, cos h)`` and body-right is ``(cos h, -sin h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..framing import CommandId

CLIMB_RATE = 2.0  # m/s
HORIZONTAL_SPEED = 5.0  # m/s
YAW_RATE = 45.0  # deg/s
HORIZONTAL_DECEL = 25.0  # m/s^2 while the stick is centred

_HORIZONTAL = {
    CommandId.FullForward: (0.0, 1.0),
    CommandId.FullBackward: (0.0, -1.0),
    CommandId.FullFlyRight: (1.0, 0.0),
    CommandId.FullFlyLeft: (-1.0, 0.0),
}


@dataclass(frozen=True)
class DroneBody:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    heading: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    yaw_rate: float = 0.0
    propellers: bool = False
    airborne: bool = False

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def body_frame_velocity(self) -> tuple:
        """(forward, right) components of the horizontal velocity."""
        h = math.radians(self.heading)
        fwd = self.vx * math.sin(h) + self.vy * math.cos(h)
        right = self.vx * math.cos(h) - self.vy * math.sin(h)
        return fwd, right


def body_to_world(heading: float, forward: float, right: float) -> tuple:
    h = math.radians(heading)
    return forward * math.sin(h) + right * math.cos(h), forward * math.cos(h) - right * math.sin(h)


def _decay(vx: float, vy: float, dt: float) -> tuple:
    speed = math.hypot(vx, vy)
    if speed == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    new = max(0.0, speed - HORIZONTAL_DECEL * dt)
    scale = new / speed
    # distance covered while braking linearly over the step
    t_stop = min(dt, speed / HORIZONTAL_DECEL)
    dist = speed * t_stop - 0.5 * HORIZONTAL_DECEL * t_stop * t_stop
    return vx * scale, vy * scale, vx / speed * dist, vy / speed * dist


def kinematics_step(body: DroneBody, cmd: CommandId, dt: float) -> DroneBody:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if cmd is CommandId.Ready:
        if not body.propellers and not body.airborne:
            return replace(body, propellers=True)
        cmd = CommandId.Idle
    if not body.propellers:
        return replace(body, vx=0.0, vy=0.0, vz=0.0, yaw_rate=0.0)

    if cmd is CommandId.FullUp:
        vx, vy, dx, dy = _decay(body.vx, body.vy, dt)
        return replace(
            body, x=body.x + dx, y=body.y + dy, z=body.z + CLIMB_RATE * dt,
            vx=vx, vy=vy, vz=CLIMB_RATE, yaw_rate=0.0, airborne=True,
        )

    if cmd is CommandId.FullDown:
        if not body.airborne:
            # holding the stick down on the ground stops the motors
            return replace(body, vx=0.0, vy=0.0, vz=0.0, yaw_rate=0.0, propellers=False)
        vx, vy, dx, dy = _decay(body.vx, body.vy, dt)
        z = max(0.0, body.z - CLIMB_RATE * dt)
        landed = z == 0.0
        return replace(
            body, x=body.x + dx, y=body.y + dy, z=z,
            vx=0.0 if landed else vx, vy=0.0 if landed else vy,
            vz=0.0 if landed else -CLIMB_RATE, yaw_rate=0.0, airborne=not landed,
        )

    if not body.airborne:
        return replace(body, vx=0.0, vy=0.0, vz=0.0, yaw_rate=0.0)

    if cmd in _HORIZONTAL:
        right, fwd = _HORIZONTAL[cmd]
        vx, vy = body_to_world(body.heading, fwd * HORIZONTAL_SPEED, right * HORIZONTAL_SPEED)
        return replace(body, x=body.x + vx * dt, y=body.y + vy * dt, vx=vx, vy=vy, vz=0.0, yaw_rate=0.0)

    vx, vy, dx, dy = _decay(body.vx, body.vy, dt)
    moved = replace(body, x=body.x + dx, y=body.y + dy, vx=vx, vy=vy, vz=0.0, yaw_rate=0.0)
    if cmd is CommandId.FullRotateRight:
        return replace(moved, heading=(body.heading + YAW_RATE * dt) % 360.0, yaw_rate=YAW_RATE)
    if cmd is CommandId.FullRotateLeft:
        return replace(moved, heading=(body.heading - YAW_RATE * dt) % 360.0, yaw_rate=-YAW_RATE)
    return moved
