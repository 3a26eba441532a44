"""TCP relay between a frame forger and the injector radio.

Wire format, both directions: ``[u32 big-endian length][bytes]``.

Client to server:

* a frame (10 bytes or more) is injected; the reply is one 4-byte envelope
  holding the running injected-frame count
* an empty envelope asks the radio to let one tick pass; the reply is every
  frame heard during it, one envelope each, closed by an empty envelope
* a 1-byte envelope tunes the radio to that channel; the reply is empty

Anything longer than ``MAX_FRAME`` or cut short by EOF is a malformed
envelope and drops the connection.  Injections from all clients are
serialised into one ordered stream.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from typing import List, Optional, Tuple

MAX_FRAME = 2346
IDLE_TIMEOUT = 30.0
_LEN = struct.Struct(">I")


class MalformedEnvelope(ValueError):
    pass


class ConnectionLost(ConnectionError):
    pass


def encode_envelope(payload: bytes) -> bytes:
    if len(payload) > MAX_FRAME:
        raise MalformedEnvelope(f"frame of {len(payload)} bytes exceeds {MAX_FRAME}")
    return _LEN.pack(len(payload)) + bytes(payload)


def _read_exact(sock: socket.socket, n: int) -> Optional[bytes]:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None if not buf else bytes(buf)
        buf.extend(chunk)
    return bytes(buf)


def read_envelope(sock: socket.socket) -> Optional[bytes]:
    """Next envelope payload; None on a clean EOF between envelopes."""
    head = _read_exact(sock, 4)
    if head is None:
        return None
    if len(head) < 4:
        raise MalformedEnvelope("truncated length prefix")
    (length,) = _LEN.unpack(head)
    if length > MAX_FRAME:
        raise MalformedEnvelope(f"declared length {length} exceeds {MAX_FRAME}")
    body = _read_exact(sock, length) if length else b""
    if body is None or len(body) != length:
        raise MalformedEnvelope(f"stream ended inside a {length}-byte envelope")
    return body


def _nodelay(sock: socket.socket) -> None:
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)


def parse_endpoint(text: str) -> Tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {text!r}")
    return host, int(port)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        server: RelayServer = self.server  # type: ignore[assignment]
        sock = self.request
        sock.settimeout(server.idle_timeout)
        _nodelay(sock)
        try:
            while True:
                payload = read_envelope(sock)
                if payload is None:
                    return
                sock.sendall(server.dispatch(payload))
        except (MalformedEnvelope, ValueError) as exc:
            # bad envelope or a request the radio refused: drop the client
            server.errors.append(str(exc))
        except (socket.timeout, ConnectionError, OSError):
            pass


class RelayServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, endpoint: Tuple[str, int], transport, idle_timeout: float = IDLE_TIMEOUT) -> None:
        super().__init__(endpoint, _Handler)
        self.transport = transport
        self.idle_timeout = idle_timeout
        self.lock = threading.Lock()
        self.injected = 0
        self.errors: List[str] = []
        self._thread: Optional[threading.Thread] = None

    @property
    def endpoint(self) -> Tuple[str, int]:
        return self.server_address[:2]

    def dispatch(self, payload: bytes) -> bytes:
        with self.lock:
            if not payload:
                heard = self.transport.sync()
                return b"".join(encode_envelope(f) for f in heard if len(f) <= MAX_FRAME) + encode_envelope(b"")
            if len(payload) == 1:
                self.transport.tune(payload[0])
                return encode_envelope(b"")
            self.transport.send(payload)
            self.injected += 1
            return encode_envelope(_LEN.pack(self.injected))

    def start(self) -> "RelayServer":
        self._thread = threading.Thread(target=self.serve_forever, name="relay", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread:
            self._thread.join(timeout=5)


def relay_serve(endpoint, transport, idle_timeout: float = IDLE_TIMEOUT) -> RelayServer:
    if isinstance(endpoint, str):
        endpoint = parse_endpoint(endpoint)
    return RelayServer(endpoint, transport, idle_timeout).start()


class RelayClient:
    """Transport over the relay; same interface as :class:`DirectTransport`."""

    def __init__(self, endpoint, tick_us: int = 20_000, timeout: float = IDLE_TIMEOUT) -> None:
        if isinstance(endpoint, str):
            endpoint = parse_endpoint(endpoint)
        self.sock = socket.create_connection(endpoint, timeout=timeout)
        _nodelay(self.sock)
        self.tick_us = tick_us
        self.channel: Optional[int] = None
        self.injected = 0

    def _request(self, payload: bytes) -> bytes:
        try:
            self.sock.sendall(encode_envelope(payload))
            reply = read_envelope(self.sock)
        except (OSError, MalformedEnvelope) as exc:
            raise ConnectionLost(str(exc)) from exc
        if reply is None:
            raise ConnectionLost("relay closed the connection")
        return reply

    def send(self, raw: bytes) -> int:
        if len(raw) < 2:
            raise ValueError("frames are at least two bytes")
        reply = self._request(raw)
        self.injected += 1
        return _LEN.unpack(reply)[0]

    def sync(self) -> List[bytes]:
        frames = []
        reply = self._request(b"")
        while reply:
            frames.append(reply)
            try:
                reply = read_envelope(self.sock)
            except (OSError, MalformedEnvelope) as exc:
                raise ConnectionLost(str(exc)) from exc
            if reply is None:
                raise ConnectionLost("relay closed the connection")
        return frames

    def tune(self, channel: int) -> None:
        self._request(bytes((channel,)))
        self.channel = channel

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self) -> "RelayClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def relay_send(endpoint, frame: bytes) -> int:
    """Inject one frame through a relay; returns the relay's injected-frame count."""
    with RelayClient(endpoint) as client:
        return client.send(frame)


class RelayProxy(socketserver.ThreadingTCPServer):
    """Envelope-checking forwarder: clients talk to ``upstream`` through it."""

    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, endpoint, upstream, idle_timeout: float = IDLE_TIMEOUT) -> None:
        self.upstream = parse_endpoint(upstream) if isinstance(upstream, str) else upstream
        self.idle_timeout = idle_timeout
        super().__init__(endpoint, _ProxyHandler)


class _ProxyHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        server: RelayProxy = self.server  # type: ignore[assignment]
        down = self.request
        down.settimeout(server.idle_timeout)
        _nodelay(down)
        try:
            with socket.create_connection(server.upstream, timeout=server.idle_timeout) as up:
                _nodelay(up)
                while True:
                    payload = read_envelope(down)
                    if payload is None:
                        return
                    up.sendall(encode_envelope(payload))
                    reply = read_envelope(up)
                    if reply is None:
                        return
                    down.sendall(encode_envelope(reply))
                    if payload == b"":
                        while reply:
                            reply = read_envelope(up)
                            if reply is None:
                                return
                            down.sendall(encode_envelope(reply))
        except (MalformedEnvelope, socket.timeout, OSError):
            pass
