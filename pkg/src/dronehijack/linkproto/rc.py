"""Remote-controller side of the link.

Power-on sequence: beacons, encrypted ARP for the drone IP (retried until
answered), one connection initiator, then a fixed-rate stream of control
packets carrying the current stick position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Union

from ..framing import CommandId, encode_control, encode_duml, movement_for
from ..wepcrypt.wep import IcvMismatch, WepFrame, wep_decrypt, wep_encrypt
from . import dot11
from .config import LinkConfig, SessionConstants, iv_for, reference_constants
from .drone import Received, Tick


class RcPhase(enum.Enum):
    Off = "off"
    Resolving = "resolving"
    Connected = "connected"


@dataclass(frozen=True)
class RcState:
    mac: bytes
    iv_salt: int = 0
    phase: RcPhase = RcPhase.Resolving
    stick: CommandId = CommandId.Idle
    drone_mac: Optional[bytes] = None
    last_drone_beacon: Optional[int] = None
    last_beacon_tx: Optional[int] = None
    last_arp_tx: Optional[int] = None
    last_control_tx: Optional[int] = None
    last_heartbeat_tx: Optional[int] = None
    seq: int = 0
    iv_counter: int = 0
    ip_id: int = 0


RcEvent = Union[Tick, Received]


class RcStep(NamedTuple):
    state: RcState
    emit: list


def new_rc_state(cfg: LinkConfig, iv_salt: int = 0, powered: bool = True) -> RcState:
    return RcState(mac=cfg.rc_mac_bytes, iv_salt=iv_salt, phase=RcPhase.Resolving if powered else RcPhase.Off)


def _bssid(state: RcState) -> bytes:
    return state.drone_mac or state.mac


def _seal(state: RcState, cfg: LinkConfig, dst: bytes, plaintext: bytes):
    iv = iv_for(state.iv_salt, state.iv_counter)
    body = wep_encrypt(cfg.wep_key, iv, plaintext).to_bytes()
    raw = dot11.build_data(state.mac, dst, _bssid(state), body, seq=state.seq)
    return raw, replace(state, seq=(state.seq + 1) & 0xFFF, iv_counter=state.iv_counter + 1)


def _udp(state: RcState, cfg: LinkConfig, payload: bytes):
    plain = dot11.build_udp(
        cfg.rc_ip_bytes, cfg.drone_ip_bytes, dot11.RC_UDP_PORT, dot11.DRONE_UDP_PORT, payload, ip_id=state.ip_id
    )
    return _seal(replace(state, ip_id=(state.ip_id + 1) & 0xFFFF), cfg, state.drone_mac, plain)


def _due(last: Optional[int], now: int, period: int) -> bool:
    return last is None or now - last >= period


def rc_step(
    state: RcState, event: RcEvent, now: int, cfg: LinkConfig, constants: Optional[SessionConstants] = None
) -> RcStep:
    if state.phase is RcPhase.Off:
        return RcStep(state, [])
    constants = constants or reference_constants()
    if isinstance(event, Received):
        return _on_frame(state, event.raw, now, cfg)

    emit = []
    if (
        state.phase is RcPhase.Connected
        and state.last_drone_beacon is not None
        and now - state.last_drone_beacon > cfg.peer_timeout_us
    ):
        # drone went quiet: start over with ARP
        state = replace(state, phase=RcPhase.Resolving, drone_mac=None)

    if _due(state.last_beacon_tx, now, cfg.beacon_interval_us):
        emit.append(
            dot11.build_beacon(
                state.mac,
                _bssid(state),
                cfg.channel,
                timestamp_us=now,
                interval_ms=cfg.beacon_interval_ms,
                seq=state.seq,
                role=dot11.ROLE_RC,
            )
        )
        state = replace(state, last_beacon_tx=now, seq=(state.seq + 1) & 0xFFF)

    if state.phase is RcPhase.Resolving:
        if state.drone_mac is None:
            if _due(state.last_arp_tx, now, cfg.arp_retry_ms * 1000):
                arp = dot11.build_arp(dot11.ARP_REQUEST, state.mac, cfg.rc_ip_bytes, bytes(6), cfg.drone_ip_bytes)
                raw, state = _seal(state, cfg, dot11.BROADCAST, arp)
                emit.append(raw)
                state = replace(state, last_arp_tx=now)
        else:
            raw, state = _udp(state, cfg, constants.connection_initiator)
            emit.append(raw)
            state = replace(state, phase=RcPhase.Connected, last_control_tx=None)
        return RcStep(state, emit)

    if _due(state.last_control_tx, now, cfg.control_period_us):
        payload = encode_control(
            movement_for(state.stick), constants.control_prefix, constants.control_unknown, cfg.crc
        )
        raw, state = _udp(state, cfg, payload)
        emit.append(raw)
        state = replace(state, last_control_tx=now)
    if _due(state.last_heartbeat_tx, now, cfg.heartbeat_ms * 1000):
        raw, state = _udp(state, cfg, encode_duml(constants.heartbeat_body, cfg.crc))
        emit.append(raw)
        state = replace(state, last_heartbeat_tx=now)
    return RcStep(state, emit)


def _on_frame(state: RcState, raw: bytes, now: int, cfg: LinkConfig) -> RcStep:
    try:
        frame = dot11.parse_dot11(raw)
    except dot11.MalformedFrame:
        return RcStep(state, [])
    if frame.is_beacon:
        if dot11.beacon_role(frame) == dot11.ROLE_DRONE and frame.src == (state.drone_mac or frame.src):
            state = replace(state, last_drone_beacon=now)
        return RcStep(state, [])
    if not (frame.is_data and frame.protected) or frame.dst != state.mac:
        return RcStep(state, [])
    try:
        plain = wep_decrypt(cfg.wep_key, WepFrame.from_bytes(frame.body))
    except (IcvMismatch, ValueError):
        return RcStep(state, [])
    emit = [dot11.build_ack(frame.src)]
    parsed = dot11.parse_plaintext(plain)
    if (
        isinstance(parsed, dot11.ArpPacket)
        and parsed.op == dot11.ARP_REPLY
        and parsed.spa == cfg.drone_ip_bytes
        and state.drone_mac is None
    ):
        state = replace(state, drone_mac=parsed.sha, last_drone_beacon=now)
    return RcStep(state, emit)


def power_off(state: RcState) -> RcState:
    return replace(state, phase=RcPhase.Off)


def set_stick(state: RcState, cmd: CommandId) -> RcState:
    return replace(state, stick=cmd)
