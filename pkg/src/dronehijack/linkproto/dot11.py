"""802.11 frame building/parsing for the simulated link.

Frames are plain IEEE 802.11 MPDUs without FCS (pcap link type 105):

* beacons: management, unencrypted, hidden SSID, IBSS capability
* data: ToDS=FromDS=0 (ad hoc), body is ``iv|keyid|ciphertext`` when the
  Protected bit is set, otherwise the LLC/SNAP plaintext
* acks: 10-byte control frames

Encrypted data frames are classified by length alone, the way a sniffer
without the key sees them: plaintext is always LLC/SNAP (8) followed by
either an ARP body (28) or IPv4 (20) + UDP (8) + payload.
"""

from __future__ import annotations

import enum
import ipaddress
import struct
from dataclasses import dataclass
from typing import Optional

BROADCAST = b"\xff" * 6

DATA_HEADER_LEN = 24
WEP_OVERHEAD = 8  # iv(3) + keyid(1) + icv(4)
LLC_LEN = 8
ARP_LEN = 28
IP_UDP_LEN = 28
ARP_PLAINTEXT_LEN = LLC_LEN + ARP_LEN

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_ARP = 0x0806
ARP_REQUEST = 1
ARP_REPLY = 2

ROLE_DRONE = 1
ROLE_RC = 2
_VENDOR_OUI = b"\x60\x60\x1f"

FC_BEACON = 0x80
FC_DATA = 0x08
FC_ACK = 0xD4
FLAG_PROTECTED = 0x40

DRONE_UDP_PORT = 9003
RC_UDP_PORT = 9004


class FrameKind(enum.Enum):
    Beacon = "beacon"
    ArpRequest = "arp-request"
    ArpResponse = "arp-response"
    ConnectionInitiator = "connection-initiator"
    Control = "control"
    Ack = "ack"
    Other = "other"


INITIATOR_LENGTH = 0x40
CONTROL_LENGTH = 0x3C


class MalformedFrame(ValueError):
    pass


def mac_to_str(mac: bytes) -> str:
    return ":".join(f"{b:02x}" for b in mac)


def mac_from_str(text: str) -> bytes:
    raw = bytes.fromhex(text.replace(":", "").replace("-", ""))
    if len(raw) != 6:
        raise ValueError(f"bad MAC address {text!r}")
    return raw


def ip_to_bytes(ip: str) -> bytes:
    return ipaddress.IPv4Address(ip).packed


@dataclass(frozen=True)
class Dot11:
    """Parsed MAC header plus the raw body."""

    fc: int
    flags: int
    addr1: bytes
    addr2: Optional[bytes]
    addr3: Optional[bytes]
    seq: int
    body: bytes

    @property
    def is_beacon(self) -> bool:
        return self.fc == FC_BEACON

    @property
    def is_data(self) -> bool:
        return self.fc == FC_DATA

    @property
    def is_ack(self) -> bool:
        return self.fc == FC_ACK

    @property
    def protected(self) -> bool:
        return bool(self.flags & FLAG_PROTECTED)

    @property
    def src(self) -> Optional[bytes]:
        return self.addr2

    @property
    def dst(self) -> bytes:
        return self.addr1


def parse_dot11(raw: bytes) -> Dot11:
    if len(raw) < 10:
        raise MalformedFrame(f"frame too short: {len(raw)}")
    fc, flags = raw[0], raw[1]
    if fc == FC_ACK:
        return Dot11(fc, flags, bytes(raw[4:10]), None, None, 0, b"")
    if len(raw) < DATA_HEADER_LEN:
        raise MalformedFrame(f"frame too short: {len(raw)}")
    (seq,) = struct.unpack_from("<H", raw, 22)
    return Dot11(
        fc=fc,
        flags=flags,
        addr1=bytes(raw[4:10]),
        addr2=bytes(raw[10:16]),
        addr3=bytes(raw[16:22]),
        seq=seq >> 4,
        body=bytes(raw[DATA_HEADER_LEN:]),
    )


def _header(fc: int, flags: int, a1: bytes, a2: bytes, a3: bytes, seq: int) -> bytes:
    return struct.pack("<BBH", fc, flags, 0) + a1 + a2 + a3 + struct.pack("<H", (seq & 0xFFF) << 4)


def build_beacon(
    src: bytes,
    bssid: bytes,
    channel: int,
    *,
    timestamp_us: int,
    interval_ms: int = 100,
    seq: int = 0,
    ssid: bytes = b"",
    role: int = ROLE_DRONE,
) -> bytes:
    """Hidden-SSID IBSS beacon with the privacy bit set.

    A vendor element carries the sender role (drone or controller), which is
    how a scanner tells the aircraft's beacon from the controller's.
    """
    interval_tu = max(1, round(interval_ms * 1000 / 1024))
    capability = 0x0002 | 0x0010  # IBSS, privacy
    body = struct.pack("<QHH", timestamp_us & (2**64 - 1), interval_tu, capability)
    body += bytes((0, len(ssid))) + ssid
    body += bytes((1, 1, 0x0C))  # supported rates: 6 Mb/s
    body += bytes((3, 1, channel & 0xFF))
    body += bytes((221, 4)) + _VENDOR_OUI + bytes((role,))
    return _header(FC_BEACON, 0, BROADCAST, src, bssid, seq) + body


def _beacon_element(frame: Dot11, want: int) -> Optional[bytes]:
    body = frame.body[12:]
    pos = 0
    while pos + 2 <= len(body):
        eid, elen = body[pos], body[pos + 1]
        if eid == want:
            return bytes(body[pos + 2 : pos + 2 + elen])
        pos += 2 + elen
    return None


def beacon_channel(frame: Dot11) -> Optional[int]:
    elem = _beacon_element(frame, 3)
    return elem[0] if elem and len(elem) == 1 else None


def beacon_role(frame: Dot11) -> Optional[int]:
    elem = _beacon_element(frame, 221)
    if elem and len(elem) == 4 and elem[:3] == _VENDOR_OUI:
        return elem[3]
    return None


def beacon_ssid(frame: Dot11) -> bytes:
    body = frame.body[12:]
    if len(body) >= 2 and body[0] == 0:
        return bytes(body[2 : 2 + body[1]])
    return b""


def build_ack(ra: bytes) -> bytes:
    return struct.pack("<BBH", FC_ACK, 0, 0) + ra


def build_data(
    src: bytes, dst: bytes, bssid: bytes, body: bytes, *, seq: int = 0, protected: bool = True
) -> bytes:
    return _header(FC_DATA, FLAG_PROTECTED if protected else 0, dst, src, bssid, seq) + body


# ------------------------------------------------------------- plaintexts


def llc_snap(ethertype: int) -> bytes:
    return b"\xaa\xaa\x03\x00\x00\x00" + struct.pack(">H", ethertype)


@dataclass(frozen=True)
class ArpPacket:
    op: int
    sha: bytes
    spa: bytes
    tha: bytes
    tpa: bytes


@dataclass(frozen=True)
class UdpDatagram:
    src_ip: bytes
    dst_ip: bytes
    sport: int
    dport: int
    payload: bytes


def build_arp(op: int, sha: bytes, spa: bytes, tha: bytes, tpa: bytes) -> bytes:
    return llc_snap(ETHERTYPE_ARP) + struct.pack(">HHBBH", 1, ETHERTYPE_IPV4, 6, 4, op) + sha + spa + tha + tpa


def arp_known_prefix(op: int, sender_mac: bytes) -> bytes:
    """Plaintext bytes of an ARP frame predictable from its header alone."""
    return llc_snap(ETHERTYPE_ARP) + struct.pack(">HHBBH", 1, ETHERTYPE_IPV4, 6, 4, op) + sender_mac


def _ip_checksum(header: bytes) -> int:
    total = sum(struct.unpack(f">{len(header) // 2}H", header))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def build_udp(src_ip: bytes, dst_ip: bytes, sport: int, dport: int, payload: bytes, *, ip_id: int = 0) -> bytes:
    total = 20 + 8 + len(payload)
    hdr = struct.pack(">BBHHHBBH4s4s", 0x45, 0, total, ip_id & 0xFFFF, 0x4000, 64, 17, 0, src_ip, dst_ip)
    hdr = hdr[:10] + struct.pack(">H", _ip_checksum(hdr)) + hdr[12:]
    udp = struct.pack(">HHHH", sport, dport, 8 + len(payload), 0)
    return llc_snap(ETHERTYPE_IPV4) + hdr + udp + payload


def parse_plaintext(plain: bytes):
    """Return an ArpPacket, a UdpDatagram, or None for anything else."""
    if len(plain) < LLC_LEN or plain[:6] != b"\xaa\xaa\x03\x00\x00\x00":
        return None
    (ethertype,) = struct.unpack_from(">H", plain, 6)
    rest = plain[LLC_LEN:]
    if ethertype == ETHERTYPE_ARP and len(rest) >= ARP_LEN:
        _, _, _, _, op = struct.unpack_from(">HHBBH", rest)
        return ArpPacket(op, rest[8:14], rest[14:18], rest[18:24], rest[24:28])
    if ethertype == ETHERTYPE_IPV4 and len(rest) >= IP_UDP_LEN and rest[9] == 17:
        ihl = (rest[0] & 0x0F) * 4
        sport, dport, ulen, _ = struct.unpack_from(">HHHH", rest, ihl)
        payload = rest[ihl + 8 : ihl + ulen]
        return UdpDatagram(rest[12:16], rest[16:20], sport, dport, bytes(payload))
    return None


# --------------------------------------------------------- classification


@dataclass(frozen=True)
class LinkFrame:
    kind: FrameKind
    src_mac: Optional[bytes]
    dst_mac: bytes
    channel: int
    wire_length: int
    body: bytes


def _kind_for_udp_length(length: int) -> FrameKind:
    if length == INITIATOR_LENGTH:
        return FrameKind.ConnectionInitiator
    if length == CONTROL_LENGTH:
        return FrameKind.Control
    return FrameKind.Other


def udp_payload_length(frame: Dot11) -> Optional[int]:
    """UDP payload length of a data frame, from plaintext or ciphertext size."""
    if not frame.is_data:
        return None
    if frame.protected:
        plain_len = len(frame.body) - WEP_OVERHEAD
        if plain_len <= ARP_PLAINTEXT_LEN:
            return None
        return plain_len - LLC_LEN - IP_UDP_LEN
    parsed = parse_plaintext(frame.body)
    if isinstance(parsed, UdpDatagram):
        return len(parsed.payload)
    return None


def classify(raw: bytes, channel: int = 0) -> LinkFrame:
    """Classify an on-air frame without the key (length heuristics)."""
    frame = parse_dot11(raw)
    if frame.is_beacon:
        return LinkFrame(FrameKind.Beacon, frame.src, frame.dst, channel, len(frame.body), frame.body)
    if frame.is_ack:
        return LinkFrame(FrameKind.Ack, None, frame.dst, channel, 0, b"")
    if not frame.is_data:
        return LinkFrame(FrameKind.Other, frame.src, frame.dst, channel, len(frame.body), frame.body)
    if frame.protected:
        plain_len = len(frame.body) - WEP_OVERHEAD
        if plain_len == ARP_PLAINTEXT_LEN:
            kind = FrameKind.ArpRequest if frame.dst == BROADCAST else FrameKind.ArpResponse
            return LinkFrame(kind, frame.src, frame.dst, channel, ARP_LEN, frame.body)
    else:
        parsed = parse_plaintext(frame.body)
        if isinstance(parsed, ArpPacket):
            kind = FrameKind.ArpRequest if parsed.op == ARP_REQUEST else FrameKind.ArpResponse
            return LinkFrame(kind, frame.src, frame.dst, channel, ARP_LEN, frame.body)
    length = udp_payload_length(frame)
    if length is None:
        return LinkFrame(FrameKind.Other, frame.src, frame.dst, channel, len(frame.body), frame.body)
    return LinkFrame(_kind_for_udp_length(length), frame.src, frame.dst, channel, length, frame.body)
