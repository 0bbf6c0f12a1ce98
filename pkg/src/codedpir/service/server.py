"""Per-server state, frame handlers, and the asyncio TCP daemon.

A server holds one chunk (a single coded part, or the ``m1`` cells of an
array column) and answers QUERY frames.  It never sees the target index,
only the envelope: a slot number and a query vector.
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from ..gf import FieldSpec, gf
from ..protocols import LinearPirProtocol, ProtocolError, make_protocol
from .wire import (
    HEADER_SIZE,
    MAX_FRAME,
    FrameError,
    Kind,
    WireFrame,
    answer_payload,
    parse_query,
    parse_store,
)

log = logging.getLogger(__name__)


@dataclass
class ServerState:
    """One storage node.  The chunk is write-once."""

    index: int
    chunk: np.ndarray | None = None  # shape (rows, part_len)
    field: FieldSpec | None = None
    protocol: LinearPirProtocol | None = None
    answered: list[int] = dc_field(default_factory=list)

    def status(self) -> dict:
        return {
            "server": self.index,
            "stored": self.chunk is not None,
            "rows": 0 if self.chunk is None else int(self.chunk.shape[0]),
            "part_len": 0 if self.chunk is None else int(self.chunk.shape[1]),
            "q": None if self.field is None else self.field.q,
            "protocol": None if self.protocol is None else self.protocol.name,
            "k": None if self.protocol is None else self.protocol.k,
            "answered": len(self.answered),
        }


def _error(session: int, msg: str) -> bytes:
    return WireFrame(Kind.ERROR, session, msg.encode()).encode()


def _store(state: ServerState, frame: WireFrame) -> bytes:
    if state.chunk is not None:
        return _error(frame.session, "chunk already stored")
    field_, k, name, chunk = parse_store(frame.payload, gf)
    try:
        protocol = make_protocol(name, k, field_)
    except ProtocolError as e:
        return _error(frame.session, str(e))
    chunk.setflags(write=False)
    state.chunk, state.field, state.protocol = chunk, field_, protocol
    return WireFrame(Kind.STATUS, frame.session, json.dumps(state.status()).encode()).encode()


def compute_answer(protocol: LinearPirProtocol, chunk: np.ndarray, slot: int | None, query) -> np.ndarray:
    """Flat answer elements: per row for one slot, or slot-major for all slots."""
    slots = range(protocol.k) if slot is None else [slot]
    return np.concatenate([protocol.answer_batch(t, chunk, query).ravel() for t in slots])


def _query(state: ServerState, frame: WireFrame) -> bytes:
    if state.chunk is None:
        return _error(frame.session, "no chunk stored")
    slot, query = parse_query(frame.payload, state.field)
    if query.size != state.chunk.shape[1]:
        return _error(frame.session, f"query length {query.size} does not match chunk length {state.chunk.shape[1]}")
    if slot is not None and slot >= state.protocol.k:
        return _error(frame.session, f"slot {slot} out of range for k={state.protocol.k}")
    ans = compute_answer(state.protocol, state.chunk, slot, query)
    state.answered.append(frame.session)
    return WireFrame(Kind.ANSWER, frame.session, answer_payload(ans, state.field)).encode()


def handle(state: ServerState, raw: bytes) -> bytes:
    """Process one encoded frame and return the encoded reply."""
    try:
        frame = WireFrame.decode(raw)
    except FrameError as e:
        session = int.from_bytes(raw[5:9], "big") if len(raw) >= HEADER_SIZE else 0
        return _error(session, str(e))
    try:
        if frame.kind == Kind.STORE_CHUNK:
            return _store(state, frame)
        if frame.kind == Kind.QUERY:
            return _query(state, frame)
        if frame.kind == Kind.STATUS:
            return WireFrame(Kind.STATUS, frame.session, json.dumps(state.status()).encode()).encode()
        return _error(frame.session, f"unexpected frame kind {frame.kind.name}")
    except (FrameError, ValueError) as e:
        return _error(frame.session, str(e))


# --- TCP daemon -------------------------------------------------------------


async def read_frame(reader: asyncio.StreamReader) -> bytes:
    head = await reader.readexactly(4)
    length = int.from_bytes(head, "big")
    if length < 5 or length > MAX_FRAME:
        raise FrameError(f"bad length field {length}")
    return head + await reader.readexactly(length)


async def start_server(state: ServerState, host: str = "127.0.0.1", port: int = 0) -> asyncio.base_events.Server:
    """Listen on ``host:port``; each connection is served frame by frame."""

    async def on_connect(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        try:
            while True:
                try:
                    raw = await read_frame(reader)
                except asyncio.IncompleteReadError:
                    break
                except FrameError as e:
                    writer.write(_error(0, str(e)))
                    await writer.drain()
                    break
                writer.write(handle(state, raw))
                await writer.drain()
        finally:
            writer.close()

    server = await asyncio.start_server(on_connect, host, port)
    log.info("server %d listening on %s", state.index, server.sockets[0].getsockname()[:2])
    return server


class ServerPool:
    """Several TCP daemons on one background event loop (for tests and ``serve``).

    Example::

        with ServerPool(8) as pool:
            transport = TcpTransport(pool.endpoints)
    """

    def __init__(self, m: int, host: str = "127.0.0.1", ports=None):
        self.states = [ServerState(h) for h in range(m)]
        self.host = host
        self._ports = list(ports) if ports is not None else [0] * m
        self._servers: list = [None] * m
        self.endpoints: list[tuple[str, int]] = []
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._loop.run_forever, daemon=True)

    def _call(self, coro):
        return asyncio.run_coroutine_threadsafe(coro, self._loop).result()

    def start(self) -> "ServerPool":
        self._thread.start()
        for h, st in enumerate(self.states):
            self._servers[h] = self._call(start_server(st, self.host, self._ports[h]))
            self.endpoints.append(self._servers[h].sockets[0].getsockname()[:2])
        return self

    async def _close(self, server):
        server.close()
        await server.wait_closed()

    def kill(self, h: int) -> None:
        """Stop server ``h``; later connections to it are refused."""
        if self._servers[h] is not None:
            self._call(self._close(self._servers[h]))
            self._servers[h] = None

    def stop(self) -> None:
        for h in range(len(self._servers)):
            self.kill(h)
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=5)
        self._loop.close()

    def __enter__(self) -> "ServerPool":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
