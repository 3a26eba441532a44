"""Active attacks: forging, hijack, replay and the injection relay."""

from .forge import ForgedFrames, FrameFactory, TemplateMissing, extract_templates, forge_session
from .harness import DEFAULT_KEY, hijack_world
from .hijack import (
    ConnectFailed,
    HijackDriver,
    HijackPlan,
    HijackReport,
    InvalidPlan,
    StepResult,
    StepUnverified,
    TakeoverMode,
    all_commands_plan,
    expected_effect,
    hijack,
    observed_effect,
    verify_effect,
)
from .relay import (
    ConnectionLost,
    MalformedEnvelope,
    RelayClient,
    RelayProxy,
    RelayServer,
    encode_envelope,
    read_envelope,
    relay_send,
    relay_serve,
)
from .replay import ReplayResult, handshake_segment, replay
from .transport import DirectTransport, transport_scanner

__all__ = [
    "DEFAULT_KEY",
    "ConnectFailed",
    "ConnectionLost",
    "DirectTransport",
    "ForgedFrames",
    "FrameFactory",
    "HijackDriver",
    "HijackPlan",
    "HijackReport",
    "InvalidPlan",
    "MalformedEnvelope",
    "RelayClient",
    "RelayProxy",
    "RelayServer",
    "ReplayResult",
    "StepResult",
    "StepUnverified",
    "TakeoverMode",
    "TemplateMissing",
    "all_commands_plan",
    "encode_envelope",
    "expected_effect",
    "extract_templates",
    "forge_session",
    "handshake_segment",
    "hijack",
    "hijack_world",
    "observed_effect",
    "read_envelope",
    "relay_send",
    "relay_serve",
    "replay",
    "transport_scanner",
    "verify_effect",
]
