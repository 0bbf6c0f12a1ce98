"""Client side: transports, chunk upload, and coded retrieval over the wire.

Every retrieval sends a QUERY frame to each live server (dummies are real
frames) and issues the exchanges concurrently.  Accounting is measured from
the frames themselves: payload information bits are compared against the
closed forms, and header and padding bytes are reported separately.
"""

from __future__ import annotations

import asyncio
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..arraycodes import ArrayCode, ArraySession, ArrayStore, array_finish, array_plan, array_record
from ..emulation import (
    CodedStore,
    RetrievalError,
    Session,
    StoreLayout,
    expected_traffic,
    finish,
    plan,
    record_answer,
)
from ..gf import FieldSpec
from ..pircode import PirCode
from ..protocols import LinearPirProtocol
from .server import ServerState, handle, read_frame
from .wire import Kind, WireFrame, parse_answer, parse_query, query_payload, store_payload


class ServiceError(RuntimeError):
    """A server replied with an ERROR frame or something unexpected."""


class ServerUnreachable(ServiceError):
    """One or more servers could not be contacted."""

    def __init__(self, servers: Sequence[int]):
        self.servers = tuple(sorted(servers))
        super().__init__(f"unreachable servers: {list(self.servers)}")


class Transport(ABC):
    """Delivers one request frame to server ``h`` and returns the reply frame."""

    m: int

    @abstractmethod
    async def exchange(self, h: int, frame: bytes) -> bytes: ...


class InProcessTransport(Transport):
    """Servers living in this process; frames still go through encode/decode."""

    def __init__(self, states: Sequence[ServerState]):
        self.states = list(states)
        self.m = len(self.states)
        self.down: set[int] = set()

    @classmethod
    def fresh(cls, m: int) -> "InProcessTransport":
        return cls([ServerState(h) for h in range(m)])

    def kill(self, h: int) -> None:
        self.down.add(h)

    async def exchange(self, h: int, frame: bytes) -> bytes:
        if h in self.down:
            raise ConnectionRefusedError(f"server {h} is down")
        return handle(self.states[h], frame)


class TcpTransport(Transport):
    """One short-lived TCP connection per exchange."""

    def __init__(self, endpoints: Sequence[tuple[str, int]], timeout: float = 5.0):
        self.endpoints = [(str(a), int(b)) for a, b in endpoints]
        self.m = len(self.endpoints)
        self.timeout = timeout

    async def _exchange(self, h: int, frame: bytes) -> bytes:
        reader, writer = await asyncio.open_connection(*self.endpoints[h])
        try:
            writer.write(frame)
            await writer.drain()
            return await read_frame(reader)
        finally:
            writer.close()

    async def exchange(self, h: int, frame: bytes) -> bytes:
        return await asyncio.wait_for(self._exchange(h, frame), self.timeout)


_CONNECT_ERRORS = (OSError, asyncio.TimeoutError, asyncio.IncompleteReadError)


async def _fan_out(transport: Transport, frames: dict[int, bytes]) -> tuple[dict[int, bytes], set[int]]:
    hs = sorted(frames)
    results = await asyncio.gather(*(transport.exchange(h, frames[h]) for h in hs), return_exceptions=True)
    replies, dead = {}, set()
    for h, r in zip(hs, results):
        if isinstance(r, _CONNECT_ERRORS):
            dead.add(h)
        elif isinstance(r, BaseException):
            raise r
        else:
            replies[h] = r
    return replies, dead


def _expect(raw: bytes, kind: Kind, h: int) -> WireFrame:
    frame = WireFrame.decode(raw)
    if frame.kind == Kind.ERROR:
        raise ServiceError(f"server {h}: {frame.payload.decode(errors='replace')}")
    if frame.kind != kind:
        raise ServiceError(f"server {h}: expected {kind.name}, got {frame.kind.name}")
    return frame


# --- upload -----------------------------------------------------------------


async def upload_async(transport: Transport, chunks, protocol: LinearPirProtocol, session: int = 0) -> list[dict]:
    """Send each server its chunk (``chunks[h]`` of shape ``(rows, L)`` or ``(L,)``)."""
    if len(chunks) != transport.m:
        raise ServiceError(f"{len(chunks)} chunks for {transport.m} servers")
    frames = {
        h: WireFrame(Kind.STORE_CHUNK, session, store_payload(c, protocol.field, protocol.k, protocol.name)).encode()
        for h, c in enumerate(chunks)
    }
    replies, dead = await _fan_out(transport, frames)
    if dead:
        raise ServerUnreachable(dead)
    return [json.loads(_expect(replies[h], Kind.STATUS, h).payload) for h in range(transport.m)]


def upload(transport: Transport, store: CodedStore | ArrayStore, protocol: LinearPirProtocol) -> list[dict]:
    return asyncio.run(upload_async(transport, list(store.chunks), protocol))


async def probe_async(transport: Transport, session: int = 0) -> tuple[dict[int, dict], set[int]]:
    """STATUS of every server, plus the set that could not be reached."""
    frames = {h: WireFrame(Kind.STATUS, session).encode() for h in range(transport.m)}
    replies, dead = await _fan_out(transport, frames)
    return {h: json.loads(_expect(r, Kind.STATUS, h).payload) for h, r in replies.items()}, dead


# --- accounting -------------------------------------------------------------


@dataclass
class WireAccounting:
    """Traffic measured from the frames of one retrieval.

    ``upload_bits``/``download_bits`` count field-element information bits
    decoded from QUERY and ANSWER payloads.  ``*_bytes`` are raw frame sizes
    including the 9-byte headers and payload headers.
    """

    upload_bits: int = 0
    download_bits: int = 0
    upload_bytes: int = 0
    download_bytes: int = 0
    frames: int = 0
    expected_upload: int = 0
    expected_download: int = 0
    servers: int = 0
    sent: dict[int, bytes] = field(default_factory=dict)
    received: dict[int, bytes] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.upload_bits == self.expected_upload and self.download_bits == self.expected_download

    @property
    def header_bytes(self) -> int:
        return self.upload_bytes + self.download_bytes - (self.upload_bits + self.download_bits) // 8

    def summary(self) -> str:
        return (
            f"upload={self.upload_bits} bits (expected {self.expected_upload}) "
            f"download={self.download_bits} bits (expected {self.expected_download}) "
            f"raw={self.upload_bytes}+{self.download_bytes} bytes over {self.frames} frames"
        )


def _measure(acct: WireAccounting, field_: FieldSpec, sent: dict[int, bytes], received: dict[int, bytes]) -> None:
    for h in sorted(sent):
        q = WireFrame.decode(sent[h])
        a = WireFrame.decode(received[h])
        acct.upload_bits += parse_query(q.payload, field_)[1].size * field_.bits
        acct.download_bits += parse_answer(a.payload, field_).size * field_.bits
        acct.upload_bytes += len(sent[h])
        acct.download_bytes += len(received[h])
        acct.frames += 2
    acct.sent, acct.received = dict(sent), dict(received)
    acct.servers = len(sent)


async def _exchange_envelopes(transport, envelopes, field_, session_id):
    frames = {h: WireFrame(Kind.QUERY, session_id, query_payload(env.slot, env.query, field_)).encode() for h, env in envelopes.items()}
    replies, dead = await _fan_out(transport, frames)
    return frames, replies, dead


async def _live_servers(transport: Transport, robust: bool) -> frozenset[int]:
    if not robust:
        return frozenset()
    _, dead = await probe_async(transport)
    return frozenset(dead)


# --- retrieval --------------------------------------------------------------


async def client_retrieve_async(
    transport: Transport,
    code: PirCode,
    protocol: LinearPirProtocol,
    i: int,
    n: int,
    rng: np.random.Generator | int | None = None,
    robust: bool = False,
    respond_all: bool = False,
    session_id: int = 1,
) -> tuple[int, WireAccounting, Session]:
    """Coded retrieval of global index ``i`` over ``transport``.

    With ``robust`` the client first probes every server with STATUS and
    plans around the ones that do not answer; otherwise any unreachable
    server aborts the session and no bit is returned.
    """
    if transport.m != code.m:
        raise ServiceError(f"code has m={code.m}, transport has {transport.m} servers")
    failed = await _live_servers(transport, robust)
    layout = StoreLayout.for_length(code, n)
    session = plan(layout, protocol, i, rng, failed=failed, respond_all=respond_all)
    frames, replies, dead = await _exchange_envelopes(transport, session.envelopes, code.field, session_id)
    if dead:
        raise ServerUnreachable(dead)
    received = {}
    for h in sorted(replies):
        frame = _expect(replies[h], Kind.ANSWER, h)
        record_answer(session, protocol, h, parse_answer(frame.payload, code.field))
        received[h] = replies[h]
    up, down = expected_traffic(protocol, layout.part_len, code.m - len(failed), respond_all)
    acct = WireAccounting(expected_upload=up, expected_download=down)
    _measure(acct, code.field, frames, received)
    return finish(session, protocol), acct, session


def client_retrieve(transport: Transport, code: PirCode, protocol: LinearPirProtocol, i: int, n: int, **kw):
    """Blocking wrapper around :func:`client_retrieve_async`."""
    return asyncio.run(client_retrieve_async(transport, code, protocol, i, n, **kw))


async def array_client_retrieve_async(
    transport: Transport,
    code: ArrayCode,
    protocol: LinearPirProtocol,
    i: int,
    n: int,
    rng: np.random.Generator | int | None = None,
    session_id: int = 1,
) -> tuple[int, WireAccounting, ArraySession]:
    """Array-code retrieval: every column answers once per stored cell."""
    if transport.m != code.m2:
        raise ServiceError(f"code has m2={code.m2}, transport has {transport.m} servers")
    part_len = max(1, -(-n // code.s_total))
    session = array_plan(code, part_len, protocol, i, rng)
    frames, replies, dead = await _exchange_envelopes(transport, session.envelopes, protocol.field, session_id)
    if dead:
        raise ServerUnreachable(dead)
    for h in sorted(replies):
        ans = parse_answer(_expect(replies[h], Kind.ANSWER, h).payload, protocol.field)
        array_record(session, h, ans.reshape(code.m1, protocol.answer_length))
    up, down = expected_traffic(protocol, part_len, code.m2)
    acct = WireAccounting(expected_upload=up, expected_download=down * code.m1)
    _measure(acct, protocol.field, frames, replies)
    return array_finish(session, protocol), acct, session


def array_client_retrieve(transport: Transport, code: ArrayCode, protocol: LinearPirProtocol, i: int, n: int, **kw):
    return asyncio.run(array_client_retrieve_async(transport, code, protocol, i, n, **kw))


def in_process(store: CodedStore | ArrayStore, protocol: LinearPirProtocol) -> InProcessTransport:
    """Fresh in-process servers already holding ``store``'s chunks."""
    t = InProcessTransport.fresh(len(store.chunks))
    upload(t, store, protocol)
    return t
