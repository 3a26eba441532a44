import socket
import struct
import threading
import time

import pytest

from dronehijack.attack import (
    DEFAULT_KEY,
    ConnectionLost,
    DirectTransport,
    ForgedFrames,
    MalformedEnvelope,
    RelayClient,
    RelayProxy,
    TakeoverMode,
    all_commands_plan,
    encode_envelope,
    hijack,
    hijack_world,
    read_envelope,
    relay_send,
    relay_serve,
)
from dronehijack.attack.relay import MAX_FRAME, parse_endpoint
from dronehijack.linkproto import LinkConfig

LOCAL = ("127.0.0.1", 0)


class FakeRadio:
    tick_us = 20_000

    def __init__(self):
        self.sent = []
        self.channel = 149
        self.heard = [[b"frame-a", b"frame-b"], []]

    def sync(self):
        return self.heard.pop(0) if self.heard else []

    def send(self, raw):
        self.sent.append(raw)

    def tune(self, channel):
        if channel == 36:
            raise ValueError("no such channel")
        self.channel = channel


@pytest.fixture
def fake_server():
    radio = FakeRadio()
    server = relay_serve(LOCAL, radio, idle_timeout=5)
    yield server, radio
    server.stop()


def test_envelope_encoding():
    assert encode_envelope(b"abc") == b"\x00\x00\x00\x03abc"
    assert encode_envelope(b"") == b"\x00\x00\x00\x00"
    with pytest.raises(MalformedEnvelope):
        encode_envelope(b"x" * (MAX_FRAME + 1))


def test_read_envelope_errors():
    a, b = socket.socketpair()
    with a, b:
        a.sendall(struct.pack(">I", MAX_FRAME + 1))
        with pytest.raises(MalformedEnvelope):
            read_envelope(b)
    a, b = socket.socketpair()
    with a, b:
        a.sendall(struct.pack(">I", 10) + b"short")
        a.close()
        with pytest.raises(MalformedEnvelope):
            read_envelope(b)
    a, b = socket.socketpair()
    with a, b:
        a.close()
        assert read_envelope(b) is None


def test_parse_endpoint():
    assert parse_endpoint("127.0.0.1:80") == ("127.0.0.1", 80)
    with pytest.raises(ValueError):
        parse_endpoint("localhost")


def test_send_sync_tune(fake_server):
    server, radio = fake_server
    with RelayClient(server.endpoint) as client:
        assert client.send(b"\x08\x40hello") == 1
        assert client.send(b"\x08\x40again") == 2
        assert client.sync() == [b"frame-a", b"frame-b"]
        assert client.sync() == []
        client.tune(153)
    assert radio.sent == [b"\x08\x40hello", b"\x08\x40again"]
    assert radio.channel == 153


def test_injections_serialised_across_clients(fake_server):
    server, radio = fake_server

    def worker(tag):
        with RelayClient(server.endpoint) as c:
            for k in range(20):
                c.send(bytes((tag, k)) + b"payload")

    threads = [threading.Thread(target=worker, args=(t,)) for t in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(radio.sent) == 80 and server.injected == 80
    for tag in range(4):
        mine = [f[1] for f in radio.sent if f[0] == tag]
        assert mine == list(range(20))


def test_malformed_envelope_drops_client(fake_server):
    server, radio = fake_server
    sock = socket.create_connection(server.endpoint)
    sock.sendall(struct.pack(">I", 100_000))
    sock.settimeout(2)
    assert sock.recv(10) == b""
    sock.close()
    assert server.errors
    # the server keeps serving others
    assert relay_send(server.endpoint, b"\x08\x40ok") == 1


def test_refused_tune_drops_client(fake_server):
    server, _ = fake_server
    with RelayClient(server.endpoint) as client:
        with pytest.raises(ConnectionLost):
            client.tune(36)


def test_connection_lost_when_server_gone():
    server = relay_serve(LOCAL, FakeRadio())
    client = RelayClient(server.endpoint)
    server.stop()
    with pytest.raises(ConnectionLost):
        for _ in range(3):
            client.send(b"\x08\x40xx")
            time.sleep(0.05)
    client.close()


def test_idle_timeout_closes():
    server = relay_serve(LOCAL, FakeRadio(), idle_timeout=0.2)
    try:
        sock = socket.create_connection(server.endpoint)
        sock.settimeout(3)
        assert sock.recv(1) == b""
        sock.close()
    finally:
        server.stop()


def test_proxy_forwards(fake_server):
    server, radio = fake_server
    proxy = RelayProxy(LOCAL, server.endpoint)
    thread = threading.Thread(target=proxy.serve_forever, daemon=True)
    thread.start()
    try:
        with RelayClient(proxy.server_address[:2]) as client:
            assert client.send(b"\x08\x40via-proxy") == 1
            assert client.sync() == [b"frame-a", b"frame-b"]
            client.tune(157)
        assert radio.sent == [b"\x08\x40via-proxy"] and radio.channel == 157
    finally:
        proxy.shutdown()
        proxy.server_close()


def test_hijack_through_relay_matches_direct():
    cfg = LinkConfig(wep_key=DEFAULT_KEY)
    mode = TakeoverMode.CoexistWithRc
    direct = hijack(all_commands_plan(mode), DirectTransport(hijack_world(mode, seed=4)), DEFAULT_KEY, ForgedFrames.reference(cfg))
    server = relay_serve(LOCAL, DirectTransport(hijack_world(mode, seed=4)))
    try:
        with RelayClient(server.endpoint) as client:
            relayed = hijack(all_commands_plan(mode), client, DEFAULT_KEY, ForgedFrames.reference(cfg))
    finally:
        server.stop()
    assert relayed.to_json() == direct.to_json()
    assert relayed.all_verified
