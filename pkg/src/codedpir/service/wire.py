"""Length-prefixed binary frames exchanged between client and servers.

Layout (big-endian)::

    offset 0  u32  length   = 5 + len(payload)
    offset 4  u8   kind     (STORE_CHUNK=1, QUERY=2, ANSWER=3, STATUS=4, ERROR=5)
    offset 5  u32  session id
    offset 9  ...  payload

Payloads:

* STORE_CHUNK: ``u8 q, u8 k, u16 rows, u32 L, u8 name_len, name, elements``
  (``rows * L`` field elements, bit-packed).
* QUERY: ``u8 slot`` (255 = answer for every slot), ``u32 L``, ``L``
  bit-packed field elements.
* ANSWER: ``u16 count``, ``count`` bit-packed field elements.
* STATUS: empty request; the reply carries UTF-8 JSON.
* ERROR: UTF-8 message.

Field elements take ``ceil(log2 q)`` bits each, packed MSB first and padded
to a whole byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ..gf import FieldSpec

HEADER = struct.Struct(">IBI")
HEADER_SIZE = HEADER.size  # 9 bytes
MAX_FRAME = 64 * 1024 * 1024
ALL_SLOTS = 255


class Kind(IntEnum):
    STORE_CHUNK = 1
    QUERY = 2
    ANSWER = 3
    STATUS = 4
    ERROR = 5


class FrameError(ValueError):
    """Malformed or unknown frame."""


@dataclass(frozen=True)
class WireFrame:
    kind: Kind
    session: int
    payload: bytes = b""

    def encode(self) -> bytes:
        if len(self.payload) + 5 > MAX_FRAME:
            raise FrameError("frame too large")
        return HEADER.pack(len(self.payload) + 5, int(self.kind), self.session) + self.payload

    @classmethod
    def decode(cls, data: bytes) -> "WireFrame":
        if len(data) < HEADER_SIZE:
            raise FrameError("short frame")
        length, kind, session = HEADER.unpack_from(data)
        if length != len(data) - 4:
            raise FrameError(f"length field {length} does not match {len(data) - 4}")
        try:
            kind = Kind(kind)
        except ValueError:
            raise FrameError(f"unknown frame kind {kind}") from None
        return cls(kind, session, bytes(data[HEADER_SIZE:]))

    @property
    def size(self) -> int:
        return HEADER_SIZE + len(self.payload)


def split_stream(buf: bytes) -> tuple[list[bytes], bytes]:
    """Cut complete frames off the front of ``buf``; return them and the rest."""
    frames = []
    while len(buf) >= 4:
        (length,) = struct.unpack_from(">I", buf)
        if length < 5 or length > MAX_FRAME:
            raise FrameError(f"bad length field {length}")
        if len(buf) < 4 + length:
            break
        frames.append(buf[: 4 + length])
        buf = buf[4 + length :]
    return frames, buf


# --- element packing --------------------------------------------------------


def pack_elements(values, field: FieldSpec) -> bytes:
    v = np.asarray(values, dtype=np.uint8).ravel()
    b = field.bits
    if b == 8:
        return v.tobytes()
    bits = np.unpackbits(v[:, None], axis=1)[:, 8 - b :]
    return np.packbits(bits.ravel()).tobytes()


def unpack_elements(data: bytes, count: int, field: FieldSpec) -> np.ndarray:
    b = field.bits
    need = -(-count * b // 8)
    if len(data) < need:
        raise FrameError("element block truncated")
    raw = np.frombuffer(data[:need], dtype=np.uint8)
    if b == 8:
        out = raw[:count].copy()
    else:
        bits = np.unpackbits(raw)[: count * b].reshape(count, b)
        out = np.packbits(np.pad(bits, ((0, 0), (8 - b, 0))), axis=1).ravel()
    if out.size and out.max() >= field.q:
        raise FrameError("element outside the field")
    return out


def packed_size(count: int, field: FieldSpec) -> int:
    return -(-count * field.bits // 8)


# --- payload helpers --------------------------------------------------------

_STORE = struct.Struct(">BBHIB")
_QUERY = struct.Struct(">BI")
_ANSWER = struct.Struct(">H")


def store_payload(chunk, field: FieldSpec, k: int, protocol: str) -> bytes:
    chunk = np.atleast_2d(np.asarray(chunk, dtype=np.uint8))
    rows, L = chunk.shape
    name = protocol.encode()
    return _STORE.pack(field.q, k, rows, L, len(name)) + name + pack_elements(chunk, field)


def parse_store(payload: bytes, field_of) -> tuple[FieldSpec, int, str, np.ndarray]:
    if len(payload) < _STORE.size:
        raise FrameError("short STORE_CHUNK payload")
    q, k, rows, L, nlen = _STORE.unpack_from(payload)
    name = payload[_STORE.size : _STORE.size + nlen].decode()
    field = field_of(q)
    data = unpack_elements(payload[_STORE.size + nlen :], rows * L, field)
    return field, k, name, data.reshape(rows, L)


def query_payload(slot: int | None, query, field: FieldSpec) -> bytes:
    q = np.asarray(query, dtype=np.uint8)
    return _QUERY.pack(ALL_SLOTS if slot is None else slot, q.size) + pack_elements(q, field)


def parse_query(payload: bytes, field: FieldSpec) -> tuple[int | None, np.ndarray]:
    if len(payload) < _QUERY.size:
        raise FrameError("short QUERY payload")
    slot, L = _QUERY.unpack_from(payload)
    body = payload[_QUERY.size :]
    if len(body) != packed_size(L, field):
        raise FrameError("query length header does not match the body")
    return (None if slot == ALL_SLOTS else slot), unpack_elements(body, L, field)


def answer_payload(values, field: FieldSpec) -> bytes:
    v = np.asarray(values, dtype=np.uint8).ravel()
    return _ANSWER.pack(v.size) + pack_elements(v, field)


def parse_answer(payload: bytes, field: FieldSpec) -> np.ndarray:
    if len(payload) < _ANSWER.size:
        raise FrameError("short ANSWER payload")
    (count,) = _ANSWER.unpack_from(payload)
    return unpack_elements(payload[_ANSWER.size :], count, field)
