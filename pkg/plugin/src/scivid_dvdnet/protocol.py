"""Server-side VDN1 framing.

One message per request over a byte stream (little-endian throughout):

    Request:  "VDN1" | u8 type=1 | u8 version=1 | u16 reserved
              | u32 B | u32 H | u32 W | f32 sigma
              | B*H*W float32, frame-major row-major
    Response: same header with type=2 and a sigma echo
    Error:    "VDN1" | u8 type=3 | u8 version=1 | u16 reserved
              | u32 msg_len | UTF-8 message
"""

import struct

import numpy as np

MAGIC = b"VDN1"
VERSION = 1
MSG_REQUEST = 1
MSG_RESPONSE = 2
MSG_ERROR = 3

PREFIX = struct.Struct("<4sBBH")
CUBE_HEAD = struct.Struct("<IIIf")
ERR_HEAD = struct.Struct("<I")

#: Refuse cubes above this element count (malicious or corrupt headers).
MAX_ELEMENTS = 1 << 26


class BadRequest(Exception):
    """Request violates the framing; the reply is a type-3 message."""


def pack_response(cube, sigma_echo):
    arr = np.ascontiguousarray(cube, dtype="<f4")
    b, h, w = arr.shape
    return (PREFIX.pack(MAGIC, MSG_RESPONSE, VERSION, 0)
            + CUBE_HEAD.pack(b, h, w, float(sigma_echo))
            + arr.tobytes())


def pack_error(message):
    data = str(message).encode("utf-8")
    return (PREFIX.pack(MAGIC, MSG_ERROR, VERSION, 0)
            + ERR_HEAD.pack(len(data)) + data)


def read_exactly(stream, n):
    """Read n bytes or raise BadRequest on a short stream (b'' on EOF)."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            if not chunks:
                return b""
            raise BadRequest("request truncated")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_request(stream):
    """Read one request; returns (cube, sigma) or None at end of input."""
    prefix = read_exactly(stream, PREFIX.size)
    if prefix == b"":
        return None
    magic, msg_type, version, _ = PREFIX.unpack(prefix)
    if magic != MAGIC:
        raise BadRequest(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadRequest(f"unsupported protocol version {version}")
    if msg_type != MSG_REQUEST:
        raise BadRequest(f"unexpected message type {msg_type}")
    head = read_exactly(stream, CUBE_HEAD.size)
    if len(head) < CUBE_HEAD.size:
        raise BadRequest("request header truncated")
    b, h, w, sigma = CUBE_HEAD.unpack(head)
    count = b * h * w
    if count == 0 or count > MAX_ELEMENTS:
        raise BadRequest(f"refusing cube of {b}x{h}x{w} values")
    payload = read_exactly(stream, 4 * count)
    if len(payload) < 4 * count:
        raise BadRequest("request payload truncated")
    cube = np.frombuffer(payload, dtype="<f4").reshape(b, h, w)
    return cube, float(sigma)
