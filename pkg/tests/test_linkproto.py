import pytest
from hypothesis import given, strategies as st

from dronehijack.framing import CommandId, decode_control, movement_for
from dronehijack.linkproto import LinkConfig, NotFound, detect_beacon_channel, dot11
from dronehijack.linkproto.config import MAX_PEERS, iv_for, reference_constants
from dronehijack.linkproto.drone import Led, Phase, Received, Tick, drone_step, new_drone_state
from dronehijack.linkproto.rc import RcPhase, new_rc_state, power_off, rc_step, set_stick
from dronehijack.wepcrypt import WepKey, wep_decrypt, wep_encrypt
from dronehijack.wepcrypt.wep import WepFrame

KEY = WepKey.from_hex("a1b2c3d4e5")
CFG = LinkConfig(wep_key=KEY)
DRONE = CFG.drone_mac_bytes
RC = CFG.rc_mac_bytes
OTHER = bytes.fromhex("020000000099")
CONSTS = reference_constants()


def sealed(src, dst, plaintext, iv=b"\x00\x00\x01", key=KEY):
    body = wep_encrypt(key, iv, plaintext).to_bytes()
    return dot11.build_data(src, dst, DRONE, body)


def arp_from(mac, ip=CFG.rc_ip_bytes, key=KEY):
    return sealed(mac, dot11.BROADCAST, dot11.build_arp(dot11.ARP_REQUEST, mac, ip, bytes(6), CFG.drone_ip_bytes), key=key)


def udp_from(mac, payload):
    plain = dot11.build_udp(CFG.rc_ip_bytes, CFG.drone_ip_bytes, dot11.RC_UDP_PORT, dot11.DRONE_UDP_PORT, payload)
    return sealed(mac, DRONE, plain)


def control(cmd):
    from dronehijack.framing import encode_control

    return encode_control(movement_for(cmd), CONSTS.control_prefix, CONSTS.control_unknown)


def run(state, events, t=0):
    outs, delivered = [], []
    for ev in events:
        step = drone_step(state, ev, t, CFG)
        state = step.state
        outs += step.emit
        delivered += step.delivered
    return state, outs, delivered


# ------------------------------------------------------------------ dot11


def test_beacon_fields():
    raw = dot11.build_beacon(DRONE, DRONE, 153, timestamp_us=123)
    frame = dot11.parse_dot11(raw)
    assert frame.is_beacon and frame.src == DRONE and frame.dst == dot11.BROADCAST
    assert dot11.beacon_channel(frame) == 153
    assert dot11.beacon_role(frame) == dot11.ROLE_DRONE
    assert dot11.beacon_ssid(frame) == b""
    rc = dot11.parse_dot11(dot11.build_beacon(RC, RC, 149, timestamp_us=0, role=dot11.ROLE_RC))
    assert dot11.beacon_role(rc) == dot11.ROLE_RC


def test_malformed_frames():
    with pytest.raises(dot11.MalformedFrame):
        dot11.parse_dot11(b"\x08")
    with pytest.raises(dot11.MalformedFrame):
        dot11.parse_dot11(b"\x08\x40" + bytes(10))


@given(st.binary(max_size=200), st.integers(0, 0xFFFF))
def test_udp_roundtrip(payload, ip_id):
    plain = dot11.build_udp(b"\x01\x02\x03\x04", b"\x05\x06\x07\x08", 1000, 2000, payload, ip_id=ip_id)
    parsed = dot11.parse_plaintext(plain)
    assert parsed.payload == payload and parsed.sport == 1000 and parsed.dport == 2000
    assert dot11._ip_checksum(plain[8:28]) == 0


def test_classify_by_length_without_key():
    assert dot11.classify(arp_from(RC)).kind is dot11.FrameKind.ArpRequest
    assert dot11.classify(udp_from(RC, control(CommandId.Idle))).kind is dot11.FrameKind.Control
    assert dot11.classify(udp_from(RC, CONSTS.connection_initiator)).kind is dot11.FrameKind.ConnectionInitiator
    f = dot11.classify(udp_from(RC, b"x" * 0x56))
    assert f.kind is dot11.FrameKind.Other and f.wire_length == 0x56
    assert dot11.classify(dot11.build_ack(RC)).kind is dot11.FrameKind.Ack


def test_arp_known_prefix_is_plaintext_prefix():
    plain = dot11.build_arp(dot11.ARP_REPLY, DRONE, CFG.drone_ip_bytes, RC, CFG.rc_ip_bytes)
    prefix = dot11.arp_known_prefix(dot11.ARP_REPLY, DRONE)
    assert len(prefix) == 22 and plain.startswith(prefix)


def test_iv_for_deterministic_and_spread():
    ivs = {iv_for(3, k) for k in range(5000)}
    assert len(ivs) > 4990
    assert iv_for(3, 7) == iv_for(3, 7) != iv_for(4, 7)


# ------------------------------------------------------------------ drone


def test_drone_beacons_and_starts_red():
    state, outs, _ = run(new_drone_state(CFG), [Tick()])
    assert state.phase is Phase.Beaconing and state.led is Led.Red
    assert dot11.parse_dot11(outs[0]).is_beacon


def test_handshake_then_control_delivery():
    state, outs, _ = run(new_drone_state(CFG), [Received(arp_from(RC))])
    reply = dot11.parse_dot11(outs[0])
    arp = dot11.parse_plaintext(wep_decrypt(KEY, WepFrame.from_bytes(reply.body)))
    assert arp.op == dot11.ARP_REPLY and arp.sha == DRONE and arp.tha == RC
    assert RC in state.peers and not state.peers[RC].connected

    # controls before the initiator are ignored
    state, _, delivered = run(state, [Received(udp_from(RC, control(CommandId.FullUp)))])
    assert delivered == []

    state, _, _ = run(state, [Received(udp_from(RC, CONSTS.connection_initiator))])
    assert state.phase is Phase.Connected and state.led is Led.Green
    state, _, delivered = run(state, [Received(udp_from(RC, control(CommandId.FullUp)))])
    assert delivered == [(RC, movement_for(CommandId.FullUp))]


def test_second_peer_coexists():
    state, _, _ = run(
        new_drone_state(CFG),
        [
            Received(arp_from(RC)),
            Received(udp_from(RC, CONSTS.connection_initiator)),
            Received(arp_from(OTHER)),
            Received(udp_from(OTHER, CONSTS.connection_initiator)),
            Received(udp_from(OTHER, control(CommandId.FullDown))),
        ],
    )
    assert {p.mac for p in state.connected_peers} == {RC, OTHER}


def test_wrong_key_ignored():
    state, outs, _ = run(new_drone_state(CFG), [Received(arp_from(RC, key=WepKey(bytes(5))))])
    assert outs == [] and not state.peers


def test_bad_control_crc_dropped():
    pkt = bytearray(control(CommandId.FullUp))
    pkt[-1] ^= 0xFF
    state, _, _ = run(new_drone_state(CFG), [Received(arp_from(RC)), Received(udp_from(RC, CONSTS.connection_initiator))])
    _, _, delivered = run(state, [Received(udp_from(RC, bytes(pkt)))])
    assert delivered == []


def test_peer_expires_without_beacons():
    state, _, _ = run(new_drone_state(CFG), [Received(arp_from(RC)), Received(udp_from(RC, CONSTS.connection_initiator))])
    assert state.phase is Phase.Connected
    state, _, _ = run(state, [Tick()], t=CFG.peer_timeout_us + 1)
    assert state.phase is Phase.Beaconing and not state.peers


def test_peer_table_capacity():
    events = [Received(arp_from(bytes((2, 0, 0, 0, 1, k)))) for k in range(MAX_PEERS + 3)]
    state, outs, _ = run(new_drone_state(CFG), events)
    assert len(state.peers) == MAX_PEERS


# ------------------------------------------------------------------ rc


def test_rc_sequence():
    rc = new_rc_state(CFG)
    step = rc_step(rc, Tick(), 0, CFG)
    kinds = [dot11.classify(f).kind for f in step.emit]
    assert kinds == [dot11.FrameKind.Beacon, dot11.FrameKind.ArpRequest]

    drone, outs, _ = run(new_drone_state(CFG), [Received(step.emit[1])])
    rc = rc_step(step.state, Received(outs[0]), 1000, CFG).state
    assert rc.drone_mac == DRONE
    step = rc_step(rc, Tick(), 20_000, CFG)
    assert dot11.FrameKind.ConnectionInitiator in [dot11.classify(f).kind for f in step.emit]
    assert step.state.phase is RcPhase.Connected

    rc = set_stick(step.state, CommandId.FullForward)
    step = rc_step(rc, Tick(), 40_000, CFG)
    controls = [f for f in step.emit if dot11.classify(f).kind is dot11.FrameKind.Control]
    frame = dot11.parse_dot11(controls[0])
    udp = dot11.parse_plaintext(wep_decrypt(KEY, WepFrame.from_bytes(frame.body)))
    assert decode_control(udp.payload).movement == movement_for(CommandId.FullForward)


def test_rc_off_is_silent():
    assert rc_step(power_off(new_rc_state(CFG)), Tick(), 0, CFG).emit == []


# ------------------------------------------------------------------ scan


def test_scan_finds_drone_channel():
    beacon = dot11.build_beacon(DRONE, DRONE, 157, timestamp_us=0)
    rc_beacon = dot11.build_beacon(RC, RC, 149, timestamp_us=0, role=dot11.ROLE_RC)
    heard = {149: [rc_beacon], 157: [beacon]}
    assert detect_beacon_channel(lambda ch, dwell: heard.get(ch, [])) == 157


def test_scan_not_found_and_short_dwell():
    with pytest.raises(NotFound):
        detect_beacon_channel(lambda ch, dwell: [])
    with pytest.raises(ValueError):
        detect_beacon_channel(lambda ch, dwell: [], dwell_ms=150)
