"""Drone side of the link.

The drone beacons a hidden-SSID IBSS, answers encrypted ARP for its IP and
admits the asker as a *pending* peer; a connection-initiator datagram from a
pending peer makes it *connected*.  Control packets from any connected peer
are handed upward in arrival order.  There is no sequence/duplicate check and
no ACK requirement, so replayed and forged frames are accepted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

from ..framing import FramingError, decode_control, decode_duml
from ..wepcrypt.wep import IcvMismatch, WepFrame, wep_decrypt, wep_encrypt
from . import dot11
from .config import MAX_PEERS, LinkConfig, iv_for


class Phase(enum.Enum):
    Beaconing = "beaconing"
    Connected = "connected"


class Led(enum.Enum):
    Red = "red"
    Green = "green"


@dataclass(frozen=True)
class PeerSession:
    mac: bytes
    ip: bytes
    admitted_at: int
    last_control_or_idle: int
    last_beacon: int
    connected: bool = False


@dataclass(frozen=True)
class DroneLinkState:
    mac: bytes
    iv_salt: int = 0
    phase: Phase = Phase.Beaconing
    peers: dict = field(default_factory=dict)
    beacons_seen: dict = field(default_factory=dict)
    last_beacon_tx: Optional[int] = None
    seq: int = 0
    iv_counter: int = 0
    ip_id: int = 0

    @property
    def connected_peers(self) -> list:
        return [p for p in self.peers.values() if p.connected]

    @property
    def led(self) -> Led:
        return Led.Green if self.connected_peers else Led.Red


@dataclass(frozen=True)
class Tick:
    telemetry: Optional[bytes] = None


@dataclass(frozen=True)
class Received:
    raw: bytes


DroneEvent = Union[Tick, Received]


class DroneStep(NamedTuple):
    state: DroneLinkState
    emit: list
    delivered: list  # (peer mac, MovementField) in arrival order


def new_drone_state(cfg: LinkConfig, iv_salt: int = 0) -> DroneLinkState:
    return DroneLinkState(mac=cfg.drone_mac_bytes, iv_salt=iv_salt)


def _seal(state: DroneLinkState, cfg: LinkConfig, dst: bytes, plaintext: bytes):
    iv = iv_for(state.iv_salt, state.iv_counter)
    body = wep_encrypt(cfg.wep_key, iv, plaintext).to_bytes()
    raw = dot11.build_data(state.mac, dst, state.mac, body, seq=state.seq)
    return raw, replace(state, seq=(state.seq + 1) & 0xFFF, iv_counter=state.iv_counter + 1)


def _with_phase(state: DroneLinkState) -> DroneLinkState:
    phase = Phase.Connected if state.connected_peers else Phase.Beaconing
    return state if phase is state.phase else replace(state, phase=phase)


def drone_step(state: DroneLinkState, event: DroneEvent, now: int, cfg: LinkConfig) -> DroneStep:
    """Advance the drone link by one event at virtual time ``now`` (µs)."""
    if isinstance(event, Tick):
        return _on_tick(state, event, now, cfg)
    return _on_frame(state, event.raw, now, cfg)


def _on_tick(state: DroneLinkState, event: Tick, now: int, cfg: LinkConfig) -> DroneStep:
    timeout = cfg.peer_timeout_us
    peers = {}
    for mac, peer in state.peers.items():
        if peer.connected:
            stale = now - peer.last_control_or_idle > timeout or now - peer.last_beacon > timeout
        else:
            stale = now - peer.admitted_at > timeout
        if not stale:
            peers[mac] = peer
    if len(peers) != len(state.peers):
        state = replace(state, peers=peers)
    state = _with_phase(state)

    emit = []
    if state.last_beacon_tx is None or now - state.last_beacon_tx >= cfg.beacon_interval_us:
        emit.append(
            dot11.build_beacon(
                state.mac,
                state.mac,
                cfg.channel,
                timestamp_us=now,
                interval_ms=cfg.beacon_interval_ms,
                seq=state.seq,
                ssid=b"" if cfg.ssid_hidden else b"DRONE",
            )
        )
        state = replace(state, last_beacon_tx=now, seq=(state.seq + 1) & 0xFFF)
    if event.telemetry is not None and state.connected_peers:
        plain = dot11.build_udp(
            cfg.drone_ip_bytes,
            cfg.rc_ip_bytes,
            dot11.DRONE_UDP_PORT,
            dot11.RC_UDP_PORT,
            event.telemetry,
            ip_id=state.ip_id,
        )
        raw, state = _seal(replace(state, ip_id=(state.ip_id + 1) & 0xFFFF), cfg, dot11.BROADCAST, plain)
        emit.append(raw)
    return DroneStep(state, emit, [])


def _on_frame(state: DroneLinkState, raw: bytes, now: int, cfg: LinkConfig) -> DroneStep:
    try:
        frame = dot11.parse_dot11(raw)
    except dot11.MalformedFrame:
        return DroneStep(state, [], [])
    src = frame.src
    if src is None or src == state.mac:
        return DroneStep(state, [], [])

    if frame.is_beacon:
        seen = dict(state.beacons_seen)
        seen[src] = now
        peers = state.peers
        if src in peers:
            peers = dict(peers)
            peers[src] = replace(peers[src], last_beacon=now)
        return DroneStep(replace(state, beacons_seen=seen, peers=peers), [], [])

    if not (frame.is_data and frame.protected):
        return DroneStep(state, [], [])
    try:
        plain = wep_decrypt(cfg.wep_key, WepFrame.from_bytes(frame.body))
    except (IcvMismatch, ValueError):
        return DroneStep(state, [], [])
    parsed = dot11.parse_plaintext(plain)

    if isinstance(parsed, dot11.ArpPacket):
        if parsed.op != dot11.ARP_REQUEST or parsed.tpa != cfg.drone_ip_bytes:
            return DroneStep(state, [], [])
        reply = dot11.build_arp(dot11.ARP_REPLY, state.mac, cfg.drone_ip_bytes, parsed.sha, parsed.spa)
        out, state = _seal(state, cfg, src, reply)
        if src not in state.peers and len(state.peers) < MAX_PEERS:
            peers = dict(state.peers)
            peers[src] = PeerSession(
                mac=src,
                ip=parsed.spa,
                admitted_at=now,
                last_control_or_idle=now,
                last_beacon=now,
            )
            state = replace(state, peers=peers)
        return DroneStep(state, [out], [])

    if not isinstance(parsed, dot11.UdpDatagram) or parsed.dst_ip != cfg.drone_ip_bytes:
        return DroneStep(state, [], [])
    peer = state.peers.get(src)
    if peer is None:
        return DroneStep(state, [], [])
    length = len(parsed.payload)

    if length == dot11.INITIATOR_LENGTH:
        try:
            decode_duml(parsed.payload, cfg.crc)
        except FramingError:
            return DroneStep(state, [], [])
        peers = dict(state.peers)
        peers[src] = replace(peer, connected=True, last_control_or_idle=now)
        return DroneStep(_with_phase(replace(state, peers=peers)), [], [])

    if length == dot11.CONTROL_LENGTH and peer.connected:
        try:
            pkt = decode_control(parsed.payload, cfg.crc)
        except FramingError:
            return DroneStep(state, [], [])
        peers = dict(state.peers)
        peers[src] = replace(peer, last_control_or_idle=now)
        return DroneStep(replace(state, peers=peers), [], [(src, pkt.movement)])

    return DroneStep(state, [], [])

