"""Framed wire protocol: length-prefixed JSON envelopes with binary tensors.

Frame = 4-byte big-endian unsigned payload length + that many bytes of
UTF-8 JSON.  Requests are {"id", "cmd", "args"}; responses are {"id",
"status", "data", "tensors"} where each tensor entry carries base64 of the
little-endian row-major bytes.  Responses may complete out of order and
are matched by id.
"""

import base64
import json
import struct
import zlib

import numpy as np

MAX_FRAME = 256 * 1024 * 1024
HEADER = struct.Struct(">I")

DTYPES = {
    "f32": np.dtype("<f4"),
    "u8": np.dtype("u1"),
    "u16": np.dtype("<u2"),
    "u32": np.dtype("<u4"),
}
_DTYPE_NAMES = {v: k for k, v in DTYPES.items()}


class ProtocolError(Exception):
    pass


class FrameTooLarge(ProtocolError):
    pass


def encode_frame(message: dict) -> bytes:
    payload = json.dumps(message).encode("utf-8")
    if len(payload) > MAX_FRAME:
        raise FrameTooLarge(f"frame of {len(payload)} bytes exceeds cap")
    return HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> dict:
    try:
        message = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"bad envelope: {exc}") from None
    if not isinstance(message, dict):
        raise ProtocolError("envelope must be a JSON object")
    return message


def read_frame(recv_exact):
    """Read one frame via a recv_exact(n) callable; None on clean EOF."""
    header = recv_exact(HEADER.size)
    if header is None:
        return None
    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME:
        raise FrameTooLarge(f"declared length {length} exceeds cap")
    payload = recv_exact(length)
    if payload is None:
        raise ProtocolError("truncated frame")
    return payload


def socket_recv_exact(sock):
    """recv_exact over a socket.

    Returns exactly n bytes; None on a clean EOF before the first byte of
    this call; raises ProtocolError when the peer vanishes mid-read.
    """
    def recv_exact(n):
        chunks = []
        remaining = n
        while remaining:
            chunk = sock.recv(min(remaining, 1 << 20))
            if not chunk:
                if remaining == n:
                    return None
                raise ProtocolError("connection closed mid-frame")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)
    return recv_exact


def encode_tensor(name: str, array: np.ndarray) -> dict:
    dtype = np.dtype(array.dtype).newbyteorder("<")
    if dtype not in _DTYPE_NAMES:
        raise ProtocolError(f"unsupported tensor dtype {array.dtype}")
    data = np.ascontiguousarray(array).astype(dtype, copy=False).tobytes()
    return {
        "name": name,
        "dtype": _DTYPE_NAMES[dtype],
        "shape": list(array.shape),
        "data": base64.b64encode(data).decode("ascii"),
    }


def decode_tensor(entry: dict) -> np.ndarray:
    try:
        dtype = DTYPES[entry["dtype"]]
        shape = tuple(int(s) for s in entry["shape"])
        raw = base64.b64decode(entry["data"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad tensor entry: {exc}") from None
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(raw) != expected:
        raise ProtocolError(f"tensor byte length {len(raw)} != {expected}")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def tensor_checksum(array: np.ndarray) -> int:
    """CRC32 of the canonical little-endian row-major bytes."""
    dtype = np.dtype(array.dtype).newbyteorder("<")
    return zlib.crc32(np.ascontiguousarray(array).astype(dtype, copy=False)
                      .tobytes()) & 0xFFFFFFFF


def response(req_id, status="ok", data=None, tensors=None) -> dict:
    return {"id": req_id, "status": status, "data": data or {},
            "tensors": tensors or []}
