"""Drone and remote-controller link state machines."""

from .config import CHANNELS_5GHZ, MAX_PEERS, LinkConfig, SessionConstants, reference_constants
from .dot11 import FrameKind, LinkFrame, classify
from .drone import DroneLinkState, DroneStep, Led, PeerSession, Phase, Received, Tick, drone_step, new_drone_state
from .rc import RcPhase, RcState, new_rc_state, rc_step
from .scan import NotFound, detect_beacon_channel

__all__ = [
    "CHANNELS_5GHZ",
    "MAX_PEERS",
    "DroneLinkState",
    "DroneStep",
    "FrameKind",
    "Led",
    "LinkConfig",
    "LinkFrame",
    "NotFound",
    "PeerSession",
    "Phase",
    "RcPhase",
    "RcState",
    "Received",
    "SessionConstants",
    "Tick",
    "classify",
    "detect_beacon_channel",
    "drone_step",
    "new_drone_state",
    "new_rc_state",
    "rc_step",
    "reference_constants",
]
