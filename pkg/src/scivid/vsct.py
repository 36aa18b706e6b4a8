"""Bit-exact tensor file format for masks, cubes and measurements.

Layout (all integers little-endian):

    magic "VSCT" | u8 version=1 | u8 ndim in {2,3} | u16 reserved=0
    | ndim x u32 dims (frames-if-3D, rows, cols)
    | payload: float32 little-endian, frame-major row-major

Float32 payload is part of the format: arrays are cast on save and returned
as float32 on load, so save -> load round-trips are bitwise for float32
input.
"""

import struct

import numpy as np

__all__ = ["save_tensor", "load_tensor", "dump_tensor", "parse_tensor"]

MAGIC = b"VSCT"
VERSION = 1
_HEAD = struct.Struct("<4sBBH")


def dump_tensor(arr):
    """Serialize a 2-D or 3-D array to VSCT bytes."""
    a = np.asarray(arr)
    if a.ndim not in (2, 3):
        raise ValueError(f"VSCT stores 2-D or 3-D tensors, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("VSCT tensors must be finite")
    a32 = np.ascontiguousarray(a, dtype="<f4")
    head = _HEAD.pack(MAGIC, VERSION, a.ndim, 0)
    dims = struct.pack(f"<{a.ndim}I", *a.shape)
    return head + dims + a32.tobytes()


def parse_tensor(blob):
    """Deserialize VSCT bytes into a float32 array."""
    if len(blob) < _HEAD.size:
        raise ValueError("VSCT data truncated before header")
    magic, version, ndim, _reserved = _HEAD.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError(f"bad VSCT magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported VSCT version {version}")
    if ndim not in (2, 3):
        raise ValueError(f"VSCT ndim must be 2 or 3, got {ndim}")
    off = _HEAD.size
    if len(blob) < off + 4 * ndim:
        raise ValueError("VSCT data truncated in dims")
    dims = struct.unpack_from(f"<{ndim}I", blob, off)
    off += 4 * ndim
    count = int(np.prod(dims))
    payload = blob[off:]
    if len(payload) != 4 * count:
        raise ValueError(f"VSCT payload holds {len(payload) // 4} values, "
                         f"header declares {count}")
    arr = np.frombuffer(payload, dtype="<f4", count=count).reshape(dims)
    if not np.all(np.isfinite(arr)):
        raise ValueError("VSCT payload contains non-finite values")
    return arr.copy()


def save_tensor(path, arr):
    """Write an array to a VSCT file (casts to float32)."""
    with open(path, "wb") as fh:
        fh.write(dump_tensor(arr))


def load_tensor(path):
    """Read a VSCT file into a float32 array."""
    with open(path, "rb") as fh:
        return parse_tensor(fh.read())
