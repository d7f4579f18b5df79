"""Wire protocol for live teleoperation: JSON text messages over WebSocket.

One JSON object per frame. Client to server:

    {"type": "action", "vx": f, "vz": f, "omega": f, "rot": f, "stamp": f}

Server to client: "config" (once on connect), "state", "map_diff",
"map_sum", "chosen", "library". Unknown fields must be ignored by
consumers. A protocol violation (bad JSON, unmasked frame, oversized or
fragmented message) closes that connection only; the session continues.

The server is a minimal RFC 6455 implementation on the stdlib so a
browser can connect directly; WSClient speaks the same framing for tests
and scripted drivers.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading
from collections import deque

from .trajectory import Action

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_MAX_CLIENT_PAYLOAD = 1 << 16
_SEND_QUEUE = 256

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def fnv1a32(data) -> str:
    """FNV-1a 32-bit hash, hex encoded; mirrored by the browser cockpit."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return f"{h:08x}"


def voxel_checksum(voxels) -> str:
    """Checksum of a voxel-index set: FNV-1a over sorted "ix,iy,iz;" text."""
    parts = [f"{v[0]},{v[1]},{v[2]};" for v in sorted(voxels)]
    return fnv1a32("".join(parts))


# ----------------------------------------------------------------- framing

class ProtocolViolation(Exception):
    pass


def _read_exact(sock, n):
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("socket closed")
        buf += chunk
    return buf


def read_frame(sock, require_mask):
    """Read one frame; returns (opcode, payload bytes)."""
    head = _read_exact(sock, 2)
    fin = head[0] & 0x80
    opcode = head[0] & 0x0F
    masked = head[1] & 0x80
    length = head[1] & 0x7F
    if not fin:
        raise ProtocolViolation("fragmented frames not supported")
    if require_mask and not masked and opcode != OP_CLOSE:
        raise ProtocolViolation("client frames must be masked")
    if length == 126:
        length = struct.unpack(">H", _read_exact(sock, 2))[0]
    elif length == 127:
        length = struct.unpack(">Q", _read_exact(sock, 8))[0]
    if length > _MAX_CLIENT_PAYLOAD and require_mask:
        raise ProtocolViolation(f"payload too large ({length} bytes)")
    mask = _read_exact(sock, 4) if masked else None
    payload = _read_exact(sock, length) if length else b""
    if mask:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


def write_frame(sock, opcode, payload=b"", mask=False):
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    head = bytes([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask else 0
    if n < 126:
        head += bytes([mask_bit | n])
    elif n < (1 << 16):
        head += bytes([mask_bit | 126]) + struct.pack(">H", n)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", n)
    if mask:
        key = os.urandom(4)
        payload = key + bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    sock.sendall(head + payload)


def _handshake_server(sock):
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise ProtocolViolation("connection closed during handshake")
        data += chunk
        if len(data) > 16384:
            raise ProtocolViolation("oversized handshake")
    headers = {}
    for line in data.split(b"\r\n")[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.strip().lower()] = v.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None or headers.get(b"upgrade", b"").lower() != b"websocket":
        raise ProtocolViolation("not a websocket upgrade request")
    accept = base64.b64encode(
        hashlib.sha1(key + _WS_GUID.encode()).digest()).decode()
    sock.sendall(
        ("HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\nConnection: Upgrade\r\n"
         f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode())


# ------------------------------------------------------------------ server

class _Client:
    def __init__(self, sock, addr):
        self.sock = sock
        self.addr = addr
        self.queue = deque(maxlen=_SEND_QUEUE)   # overflow drops oldest
        self.wake = threading.Event()
        self.alive = True
        self.lock = threading.Lock()

    def enqueue(self, text):
        self.queue.append(text)
        self.wake.set()

    def close(self):
        self.alive = False
        self.wake.set()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class TelemetryServer:
    """Accepts cockpit connections, pushes telemetry, receives actions.

    on_action(action: Action, rot: float) is called from reader threads;
    last writer wins across clients.
    """

    def __init__(self, host="127.0.0.1", port=8765, on_action=None,
                 config_provider=None, snapshot_provider=None):
        self.host = host
        self.requested_port = port
        self.on_action = on_action or (lambda a, rot: None)
        self.config_provider = config_provider
        # extra messages enqueued at connect so late joiners can replay
        # subsequent diffs from a consistent base state
        self.snapshot_provider = snapshot_provider
        self._clients = []
        self._lock = threading.Lock()
        self._listener = None
        self._accept_thread = None
        self._stopped = threading.Event()

    @property
    def port(self):
        return self._listener.getsockname()[1] if self._listener else self.requested_port

    def start(self):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.requested_port))
        self._listener.listen(8)
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True, name="ws-accept")
        self._accept_thread.start()
        return self

    def stop(self):
        self._stopped.set()
        if self._listener:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            clients = list(self._clients)
            self._clients.clear()
        for c in clients:
            c.close()
        if self._accept_thread:
            self._accept_thread.join(timeout=2.0)

    @property
    def n_clients(self):
        with self._lock:
            return len(self._clients)

    def broadcast(self, message: dict):
        text = json.dumps(message)
        with self._lock:
            for c in self._clients:
                c.enqueue(text)

    # ------------------------------------------------------------ internals

    def _accept_loop(self):
        while not self._stopped.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_client, args=(sock, addr),
                             daemon=True, name=f"ws-client-{addr[1]}").start()

    def _serve_client(self, sock, addr):
        client = _Client(sock, addr)
        try:
            sock.settimeout(5.0)
            _handshake_server(sock)
            sock.settimeout(None)
        except (ProtocolViolation, ConnectionError, OSError):
            client.close()
            return
        # registration, config and state snapshot are atomic w.r.t.
        # broadcasts so the client's queue replays from a consistent base
        with self._lock:
            self._clients.append(client)
            try:
                if self.config_provider:
                    client.enqueue(json.dumps(self.config_provider()))
                if self.snapshot_provider:
                    for msg in self.snapshot_provider() or []:
                        client.enqueue(json.dumps(msg))
            except Exception:
                pass
        writer = threading.Thread(target=self._writer_loop, args=(client,),
                                  daemon=True)
        writer.start()
        try:
            self._reader_loop(client)
        finally:
            self._drop(client)

    def _reader_loop(self, client):
        while client.alive and not self._stopped.is_set():
            try:
                opcode, payload = read_frame(client.sock, require_mask=True)
            except (ProtocolViolation, ConnectionError, OSError):
                return
            if opcode == OP_CLOSE:
                try:
                    write_frame(client.sock, OP_CLOSE)
                except OSError:
                    pass
                return
            if opcode == OP_PING:
                try:
                    write_frame(client.sock, OP_PONG, payload)
                except OSError:
                    return
                continue
            if opcode != OP_TEXT:
                continue
            try:
                msg = json.loads(payload.decode("utf-8"))
                if not isinstance(msg, dict):
                    raise ValueError("message must be an object")
                if msg.get("type") == "action":
                    action = Action(float(msg.get("vx", 0.0)),
                                    float(msg.get("vz", 0.0)),
                                    float(msg.get("omega", 0.0)))
                    self.on_action(action, float(msg.get("rot", 0.0)))
            except (ValueError, TypeError, UnicodeDecodeError):
                return  # protocol violation: drop this client only

    def _writer_loop(self, client):
        while client.alive and not self._stopped.is_set():
            client.wake.wait(timeout=0.5)
            client.wake.clear()
            while client.queue:
                try:
                    text = client.queue.popleft()
                except IndexError:
                    break
                try:
                    with client.lock:
                        write_frame(client.sock, OP_TEXT, text)
                except OSError:
                    client.close()
                    return

    def _drop(self, client):
        client.close()
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)


# ------------------------------------------------------------------ client

class WSClient:
    """Minimal WebSocket client for tests and scripted cockpit drivers."""

    def __init__(self, host, port, timeout=5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        key = base64.b64encode(os.urandom(16)).decode()
        self.sock.sendall(
            (f"GET / HTTP/1.1\r\nHost: {host}:{port}\r\n"
             "Upgrade: websocket\r\nConnection: Upgrade\r\n"
             f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
             ).encode())
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("handshake failed")
            data += chunk
        if b"101" not in data.split(b"\r\n", 1)[0]:
            raise ConnectionError(f"unexpected handshake response: {data[:80]!r}")

    def send(self, message: dict):
        write_frame(self.sock, OP_TEXT, json.dumps(message), mask=True)

    def send_raw_text(self, text):
        write_frame(self.sock, OP_TEXT, text, mask=True)

    def recv(self, timeout=5.0):
        """Next text message as a dict; None on close."""
        self.sock.settimeout(timeout)
        while True:
            opcode, payload = read_frame(self.sock, require_mask=False)
            if opcode == OP_CLOSE:
                return None
            if opcode == OP_PING:
                write_frame(self.sock, OP_PONG, payload, mask=True)
                continue
            if opcode == OP_TEXT:
                return json.loads(payload.decode("utf-8"))

    def close(self):
        try:
            write_frame(self.sock, OP_CLOSE, mask=True)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
