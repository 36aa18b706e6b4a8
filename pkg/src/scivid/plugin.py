"""Host side of the out-of-process denoiser protocol (VDN1).

One message per request, over the plugin process's stdin/stdout:

    Request:  "VDN1" | u8 type=1 | u8 version=1 | u16 reserved=0
              | u32 B | u32 H | u32 W | f32 sigma
              | B*H*W float32 little-endian, frame-major row-major
    Response: "VDN1" | u8 type=2 | u8 version=1 | u16 reserved
              | u32 B | u32 H | u32 W | f32 sigma_echo | payload as above
    Error:    "VDN1" | u8 type=3 | u8 version=1 | u16 reserved
              | u32 msg_len | UTF-8 message

Keeping the neural stage behind this byte protocol leaves the toolkit free
of deep-learning runtime dependencies; any denoiser process that speaks
VDN1 can fill the secondary slot.  Endpoints are stateful sessions and the
host serializes requests per endpoint.
"""

import os
import selectors
import struct
import subprocess
import threading
import time

import numpy as np

from .errors import PluginError, PluginTimeoutError, ProtocolViolationError
from .validation import as_cube

__all__ = ["PluginEndpoint", "PluginClient", "plugin_denoise",
           "encode_request", "encode_response", "encode_error",
           "echo_respond", "MSG_REQUEST", "MSG_RESPONSE", "MSG_ERROR"]

MAGIC = b"VDN1"
PROTOCOL_VERSION = 1
MSG_REQUEST = 1
MSG_RESPONSE = 2
MSG_ERROR = 3

_PREFIX = struct.Struct("<4sBBH")       # magic, msg_type, version, reserved
_CUBE_HEAD = struct.Struct("<IIIf")     # B, H, W, sigma
_ERR_HEAD = struct.Struct("<I")         # msg_len


def encode_request(cube, sigma):
    """Serialize a denoise request; the payload is cast to float32."""
    arr = np.ascontiguousarray(as_cube(cube, "plugin cube"), dtype="<f4")
    b, h, w = arr.shape
    return (_PREFIX.pack(MAGIC, MSG_REQUEST, PROTOCOL_VERSION, 0)
            + _CUBE_HEAD.pack(b, h, w, float(sigma))
            + arr.tobytes())


def encode_response(cube, sigma_echo):
    arr = np.ascontiguousarray(np.asarray(cube), dtype="<f4")
    b, h, w = arr.shape
    return (_PREFIX.pack(MAGIC, MSG_RESPONSE, PROTOCOL_VERSION, 0)
            + _CUBE_HEAD.pack(b, h, w, float(sigma_echo))
            + arr.tobytes())


def encode_error(message):
    data = message.encode("utf-8")
    return (_PREFIX.pack(MAGIC, MSG_ERROR, PROTOCOL_VERSION, 0)
            + _ERR_HEAD.pack(len(data)) + data)


def echo_respond(request):
    """Reference in-process responder: answer any valid request with its
    own payload.  Used by the loopback endpoint and protocol tests."""
    if len(request) < _PREFIX.size + _CUBE_HEAD.size:
        return encode_error("request truncated")
    magic, msg_type, version, _ = _PREFIX.unpack_from(request, 0)
    if magic != MAGIC or version != PROTOCOL_VERSION:
        return encode_error("bad magic or version")
    if msg_type != MSG_REQUEST:
        return encode_error(f"unexpected message type {msg_type}")
    b, h, w, sigma = _CUBE_HEAD.unpack_from(request, _PREFIX.size)
    payload = request[_PREFIX.size + _CUBE_HEAD.size:]
    if len(payload) != 4 * b * h * w:
        return encode_error("payload length mismatch")
    arr = np.frombuffer(payload, dtype="<f4").reshape(b, h, w)
    return encode_response(arr, sigma)


class PluginEndpoint:
    """Address of a denoiser: a launch command, a stream pair, or loopback.

    ``loopback=True`` routes requests through the in-process echo responder,
    exercising the full byte path without any child process.
    """

    def __init__(self, command=None, streams=None, loopback=False,
                 version=PROTOCOL_VERSION, timeout=30.0):
        if timeout <= 0:
            raise ValueError("endpoint timeout must be > 0")
        modes = sum([command is not None, streams is not None, bool(loopback)])
        if modes != 1:
            raise ValueError("endpoint needs exactly one of "
                             "command / streams / loopback")
        self.command = tuple(command) if command is not None else None
        self.streams = streams
        self.loopback = bool(loopback)
        self.version = version
        self.timeout = float(timeout)

    def __repr__(self):
        if self.loopback:
            return "PluginEndpoint(loopback)"
        if self.command is not None:
            return f"PluginEndpoint(command={' '.join(self.command)!r})"
        return "PluginEndpoint(streams)"


class _StreamTransport:
    """Blocking reads on a caller-supplied (send, recv) stream pair."""

    def __init__(self, send, recv):
        self._send = send
        self._recv = recv

    def request(self, data, timeout):
        if self._send is not None:
            self._send.write(data)
            self._send.flush()
        return lambda n: self._recv.read(n)

    def close(self):
        pass


class _LoopbackTransport:
    """Feeds requests straight into the in-process echo responder."""

    def __init__(self):
        self._buf = b""

    def request(self, data, timeout):
        self._buf = echo_respond(data)

        def read(n):
            out, self._buf = self._buf[:n], self._buf[n:]
            return out
        return read

    def close(self):
        pass


class _ProcessTransport:
    """Child process speaking VDN1 on its stdin/stdout, with read deadlines."""

    def __init__(self, command):
        self._proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        os.set_blocking(self._proc.stdout.fileno(), False)
        self._sel = selectors.DefaultSelector()
        self._sel.register(self._proc.stdout, selectors.EVENT_READ)

    def request(self, data, timeout):
        if self._proc.poll() is not None:
            raise ProtocolViolationError(
                f"plugin process exited with code {self._proc.returncode}")
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolViolationError(f"plugin pipe closed: {exc}") from exc
        deadline = time.monotonic() + timeout
        fd = self._proc.stdout.fileno()

        def read(n):
            chunks = []
            need = n
            while need > 0:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise PluginTimeoutError(
                        f"plugin did not answer within {timeout:.1f}s")
                if not self._sel.select(remaining):
                    continue
                chunk = os.read(fd, need)
                if chunk == b"":
                    break  # EOF; caller reports the short read
                chunks.append(chunk)
                need -= len(chunk)
            return b"".join(chunks)
        return read

    def close(self):
        self._sel.close()
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class PluginClient:
    """One live denoiser session; requests are strictly serialized."""

    def __init__(self, endpoint):
        self.endpoint = endpoint
        self._lock = threading.Lock()
        if endpoint.loopback:
            self._transport = _LoopbackTransport()
            self.name = "echo-loopback"
        elif endpoint.streams is not None:
            self._transport = _StreamTransport(*endpoint.streams)
            self.name = "stream-plugin"
        else:
            self._transport = _ProcessTransport(endpoint.command)
            self.name = "plugin"

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        self._transport.close()

    def denoise(self, cube, sigma):
        """Send one cube at noise level sigma; return the denoised cube.

        Raises a typed error on timeout, protocol violation, or an explicit
        plugin error message; never returns unvalidated bytes.
        """
        arr = as_cube(cube, "plugin cube")
        request = encode_request(arr, sigma)
        with self._lock:
            read = self._transport.request(request, self.endpoint.timeout)
            return self._read_response(read, arr.shape, arr.dtype)

    def _read_response(self, read, expected_shape, dtype):
        prefix = read(_PREFIX.size)
        if len(prefix) < _PREFIX.size:
            raise ProtocolViolationError("response ended before the header")
        magic, msg_type, version, _ = _PREFIX.unpack(prefix)
        if magic != MAGIC:
            raise ProtocolViolationError(f"bad response magic {magic!r}")
        if version != PROTOCOL_VERSION:
            raise ProtocolViolationError(
                f"unsupported protocol version {version}")
        if msg_type == MSG_ERROR:
            head = read(_ERR_HEAD.size)
            if len(head) < _ERR_HEAD.size:
                raise ProtocolViolationError("error message truncated")
            (msg_len,) = _ERR_HEAD.unpack(head)
            msg = read(msg_len).decode("utf-8", errors="replace")
            raise PluginError(f"plugin reported: {msg}")
        if msg_type != MSG_RESPONSE:
            raise ProtocolViolationError(
                f"unexpected message type {msg_type}")
        head = read(_CUBE_HEAD.size)
        if len(head) < _CUBE_HEAD.size:
            raise ProtocolViolationError("response header truncated")
        b, h, w, _sigma_echo = _CUBE_HEAD.unpack(head)
        if (b, h, w) != expected_shape:
            raise ProtocolViolationError(
                f"response dims {(b, h, w)} do not match request "
                f"{tuple(expected_shape)}")
        payload = read(4 * b * h * w)
        if len(payload) != 4 * b * h * w:
            raise ProtocolViolationError("response payload truncated")
        out = np.frombuffer(payload, dtype="<f4").reshape(b, h, w)
        return out.astype(dtype, copy=False).copy()


def plugin_denoise(cube, sigma, endpoint):
    """One-shot denoise via an endpoint (opens and closes a session)."""
    with PluginClient(endpoint) as client:
        return client.denoise(cube, sigma)
