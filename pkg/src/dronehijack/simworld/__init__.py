"""Deterministic radio medium, flight model and scenario runner."""

from .kinematics import CLIMB_RATE, HORIZONTAL_SPEED, YAW_RATE, DroneBody, kinematics_step
from .medium import LOSS_PATHS, Medium, NoSuchChannel, Station, Tap, VirtualClock
from .observe import MANEUVERS, ObservationEvent, Observer
from .scenario import ArpReplay, InvalidScript, ScenarioResult, ScenarioScript, build_world, run_scenario
from .telemetry import Telemetry, decode_telemetry, encode_telemetry
from .world import TICK_US, FlightController, World


def attach_tap(medium: Medium, channel: int) -> Tap:
    return medium.attach_tap(channel)


__all__ = [
    "CLIMB_RATE",
    "HORIZONTAL_SPEED",
    "LOSS_PATHS",
    "MANEUVERS",
    "TICK_US",
    "YAW_RATE",
    "ArpReplay",
    "DroneBody",
    "FlightController",
    "InvalidScript",
    "Medium",
    "NoSuchChannel",
    "ObservationEvent",
    "Observer",
    "ScenarioResult",
    "ScenarioScript",
    "Station",
    "Tap",
    "Telemetry",
    "VirtualClock",
    "World",
    "attach_tap",
    "build_world",
    "decode_telemetry",
    "encode_telemetry",
    "kinematics_step",
    "run_scenario",
]
