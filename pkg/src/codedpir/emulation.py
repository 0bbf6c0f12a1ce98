"""Running a linear k-server PIR protocol over coded storage.

The database is cut into ``s`` parts and stored as ``c = x G`` across ``m``
servers.  To read a bit of part ``l`` the client draws the ``k`` base
queries once, picks a uniform permutation ``sigma`` of the query slots and
sends ``q_{sigma(j)}`` (with the slot number) to every server of the j-th
recovery set of ``e_l``.  All other servers get a dummy envelope with a
uniform slot and a uniform query, so every server sees the same
distribution whatever the target.  Linearity lets the client fold each
recovery set's answers into the answer a replica of ``x_l`` would have
given.

Indices are 0-based throughout: global bit ``i`` lives in part
``i // L`` at offset ``i % L`` where ``L = n / s``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .gf import FieldSpec
from .pircode import PirCode, RecoverySet
from .protocols import (
    EXACT_SPACE_LIMIT,
    AuditVerdict,
    LinearPirProtocol,
    RandomTape,
    enumerate_tapes,
    tape_space_size,
    total_variation,
)


class RetrievalError(ValueError):
    """Retrieval cannot proceed (mismatched k, index range, too many failures)."""


@dataclass(frozen=True)
class Database:
    """``n`` field elements split into ``s`` equal parts (zero-padded)."""

    field: FieldSpec
    s: int
    data: np.ndarray  # padded, length s * part_len
    n: int

    @classmethod
    def from_values(cls, values, s: int, field: FieldSpec) -> "Database":
        values = np.asarray(values, dtype=np.uint8).ravel()
        if s < 1:
            raise RetrievalError("need s >= 1")
        if values.size and values.max() >= field.q:
            raise RetrievalError("value outside the field")
        L = max(1, -(-values.size // s))
        data = np.zeros(s * L, dtype=np.uint8)
        data[: values.size] = values
        data.setflags(write=False)
        return cls(field, s, data, int(values.size))

    @classmethod
    def random(cls, n: int, s: int, field: FieldSpec, seed=None) -> "Database":
        return cls.from_values(field.random(np.random.default_rng(seed), n), s, field)

    @property
    def part_len(self) -> int:
        return self.data.size // self.s

    @property
    def parts(self) -> np.ndarray:
        return self.data.reshape(self.s, self.part_len)

    def locate(self, i: int) -> tuple[int, int]:
        """``(part, offset)`` of global index ``i`` (pad positions allowed)."""
        if not 0 <= i < self.data.size:
            raise RetrievalError(f"index {i} out of range")
        return divmod(i, self.part_len)

    def __getitem__(self, i: int) -> int:
        return int(self.data[i])


@dataclass(frozen=True)
class CodedStore:
    """Per-server chunks ``c_1..c_m`` with ``(c_1..c_m) = (x_1..x_s) G``."""

    code: PirCode
    chunks: np.ndarray  # shape (m, part_len)
    n: int

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def s(self) -> int:
        return self.code.s

    @property
    def part_len(self) -> int:
        return self.chunks.shape[1]

    @property
    def field(self) -> FieldSpec:
        return self.code.field

    @property
    def overhead(self) -> Fraction:
        return Fraction(self.m, self.s)

    def locate(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.s * self.part_len:
            raise RetrievalError(f"index {i} out of range")
        return divmod(i, self.part_len)


@dataclass(frozen=True)
class StoreLayout:
    """What a client knows about a coded store: the code and the part length.

    Enough to plan a session without holding any chunk.
    """

    code: PirCode
    part_len: int
    n: int

    @classmethod
    def for_length(cls, code: PirCode, n: int) -> "StoreLayout":
        return cls(code, max(1, -(-n // code.s)), n)

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def field(self) -> FieldSpec:
        return self.code.field

    def locate(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.code.s * self.part_len:
            raise RetrievalError(f"index {i} out of range")
        return divmod(i, self.part_len)


def distribute(db: Database, code: PirCode) -> CodedStore:
    """Encode every symbol position across the parts with ``G``."""
    if code.s != db.s:
        raise RetrievalError(f"code has s={code.s}, database has {db.s} parts")
    if code.field != db.field:
        raise RetrievalError("code and database fields differ")
    chunks = code.field.matmul(code.G.data.T, db.parts)
    chunks.setflags(write=False)
    return CodedStore(code, chunks, db.n)


# --- planning ---------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """What one server receives: its query and the slot to answer for.

    ``slot`` is ``None`` when the server is asked to answer for every slot.
    """

    server: int
    slot: int | None
    query: np.ndarray

    def key(self) -> tuple:
        return (self.slot, self.query.tobytes())


@dataclass
class Session:
    """One coded retrieval: plan, replies, and communication counters."""

    index: int
    part: int
    offset: int
    witnesses: tuple[RecoverySet, ...]
    sigma: tuple[int, ...]
    roles: tuple[int | None, ...]
    envelopes: dict[int, Envelope]
    respond_all: bool = False
    permute: bool = True
    failed: frozenset[int] = frozenset()
    answers: dict[int, np.ndarray] = field(default_factory=dict)
    uploaded_bits: int = 0
    downloaded_bits: int = 0

    @property
    def contacted(self) -> list[int]:
        return sorted(self.envelopes)

    def slot_of(self, j: int) -> int:
        return self.sigma[j] if self.permute else j


def choose_witnesses(code: PirCode, part: int, k: int, failed: Iterable[int] = ()) -> tuple[RecoverySet, ...]:
    """First ``k`` recovery sets of ``e_part`` avoiding every failed server."""
    if k > code.k:
        raise RetrievalError(f"protocol needs k={k} but the code is certified for {code.k}")
    dead = set(failed)
    alive = [R for R in code.witnesses[part] if not dead.intersection(R.columns)]
    if len(alive) < k:
        raise RetrievalError(f"only {len(alive)} recovery sets of part {part} survive {sorted(dead)}; need {k}")
    return tuple(alive[:k])


def server_roles(witnesses: Sequence[RecoverySet], m: int) -> tuple[int | None, ...]:
    """For each server, the recovery set it serves in (``None`` for dummies)."""
    roles: list[int | None] = [None] * m
    for j, R in enumerate(witnesses):
        for h in R.columns:
            roles[h] = j
    return tuple(roles)


def make_envelope(
    h: int,
    role: int | None,
    queries: Sequence[np.ndarray],
    sigma: Sequence[int],
    dummy_slot: int,
    dummy_query: np.ndarray,
    respond_all: bool = False,
    permute: bool = True,
) -> Envelope:
    """The single rule mapping a server's role to what it is sent."""
    if role is None:
        slot, q = dummy_slot, dummy_query
    else:
        slot = sigma[role] if permute else role
        q = queries[slot]
    return Envelope(h, None if respond_all else slot, np.asarray(q, dtype=np.uint8))


def plan(
    store: CodedStore | StoreLayout,
    protocol: LinearPirProtocol,
    i: int,
    rng: np.random.Generator | int | None = None,
    failed: Iterable[int] = (),
    respond_all: bool = False,
    permute: bool = True,
) -> Session:
    """Draw the base queries, ``sigma`` and dummies; build every envelope.

    The generator is split once: the first child feeds the base protocol
    and ``sigma``, child ``h + 1`` feeds server ``h``'s dummy.
    """
    if protocol.field != store.field:
        raise RetrievalError("protocol and store fields differ")
    part, offset = store.locate(i)
    failed = frozenset(failed)
    k = protocol.k
    wit = choose_witnesses(store.code, part, k, failed)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    main, *per_server = rng.spawn(store.m + 1)
    queries = protocol.query(store.part_len, offset, RandomTape(store.field, rng=main))
    sigma = tuple(int(a) for a in main.permutation(k))
    roles = server_roles(wit, store.m)
    envelopes = {}
    for h in range(store.m):
        if h in failed:
            continue
        g = per_server[h]
        slot = int(g.integers(0, k))
        dq = protocol.dummy_query(store.part_len, RandomTape(store.field, rng=g))
        envelopes[h] = make_envelope(h, roles[h], queries, sigma, slot, dq, respond_all, permute)
    return Session(i, part, offset, wit, sigma, roles, envelopes, respond_all, permute, failed)


def server_answer(protocol: LinearPirProtocol, chunk, env: Envelope) -> np.ndarray:
    """What a server holding ``chunk`` returns for ``env`` (flat field elements)."""
    chunk = np.asarray(chunk, dtype=np.uint8)
    if env.slot is None:
        return np.concatenate([protocol.answer(t, chunk, env.query) for t in range(protocol.k)])
    return np.asarray(protocol.answer(env.slot, chunk, env.query), dtype=np.uint8)


def record_answer(session: Session, protocol: LinearPirProtocol, h: int, answer) -> None:
    """Store a server's reply and update the counters (information bits only)."""
    env = session.envelopes[h]
    session.answers[h] = np.asarray(answer, dtype=np.uint8)
    bits = protocol.field.bits
    session.uploaded_bits += env.query.size * bits
    session.downloaded_bits += session.answers[h].size * bits


def finish(session: Session, protocol: LinearPirProtocol) -> int:
    """Fold each recovery set's answers and run the base reconstruction."""
    F = protocol.field
    L = protocol.answer_length
    by_slot: list[np.ndarray | None] = [None] * protocol.k
    for j, R in enumerate(session.witnesses):
        t = session.slot_of(j)
        acc = np.zeros(L, dtype=np.uint8)
        for h, coef in R.members:
            if h not in session.answers:
                raise RetrievalError(f"missing answer from server {h}")
            a = session.answers[h]
            if session.respond_all:
                a = a[t * L : (t + 1) * L]
            acc = F.vadd(acc, F.vmul(np.full(L, coef, dtype=np.uint8), a))
        by_slot[t] = acc
    return protocol.reconstruct(session.offset, by_slot)


def retrieve(
    store: CodedStore,
    protocol: LinearPirProtocol,
    i: int,
    rng: np.random.Generator | int | None = None,
    respond_all: bool = False,
    permute: bool = True,
) -> tuple[int, Session]:
    """Read global index ``i``; every server is contacted."""
    session = plan(store, protocol, i, rng, respond_all=respond_all, permute=permute)
    for h, env in session.envelopes.items():
        record_answer(session, protocol, h, server_answer(protocol, store.chunks[h], env))
    return finish(session, protocol), session


def retrieve_robust(
    store: CodedStore,
    protocol: LinearPirProtocol,
    i: int,
    failed: Iterable[int],
    rng: np.random.Generator | int | None = None,
) -> tuple[int, Session]:
    """As :func:`retrieve`, with known-dead servers left out.

    Needs ``k`` recovery sets of the target part that avoid every failed
    server; a single failure removes at most one set.
    """
    failed = frozenset(failed)
    if any(not 0 <= h < store.m for h in failed):
        raise RetrievalError("failed server index out of range")
    session = plan(store, protocol, i, rng, failed=failed)
    for h, env in session.envelopes.items():
        record_answer(session, protocol, h, server_answer(protocol, store.chunks[h], env))
    return finish(session, protocol), session


def sweep_tapes(
    store: CodedStore,
    protocol: LinearPirProtocol,
    i: int,
    tapes,
    rng: np.random.Generator | int | None = None,
    failed: Iterable[int] = (),
) -> np.ndarray:
    """:func:`retrieve` of ``x_i`` once per row of ``tapes``, vectorized.

    Each row is a full base-protocol tape; ``sigma`` is drawn per row from
    ``rng``.  Dummy servers are skipped since their answers never enter the
    reconstruction.  Returns the ``T`` retrieved values.
    """
    part, offset = store.locate(i)
    k, F, L = protocol.k, store.field, protocol.answer_length
    wit = choose_witnesses(store.code, part, k, failed)
    tapes = np.atleast_2d(np.asarray(tapes, dtype=np.uint8))
    T = len(tapes)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    queries = protocol.query_batch(store.part_len, offset, tapes)  # (T, k, n)
    sigma = np.argsort(rng.random((T, k)), axis=1)
    rows = np.arange(T)
    by_slot = np.zeros((T, k, L), dtype=np.uint8)
    for j, R in enumerate(wit):
        slots = sigma[:, j]
        q = queries[rows, slots]
        acc = np.zeros((T, L), dtype=np.uint8)
        for h, coef in R.members:
            ans = protocol.answer_rows(slots, store.chunks[h], q)
            acc = F.vadd(acc, F.vmul(np.full_like(ans, coef), ans))
        by_slot[rows, slots] = acc
    return protocol.reconstruct_batch(offset, by_slot)


@dataclass(frozen=True)
class AccountingReport:
    ok: bool
    uploaded: int
    downloaded: int
    expected_upload: int
    expected_download: int

    def __bool__(self) -> bool:
        return self.ok


def expected_traffic(protocol: LinearPirProtocol, part_len: int, servers: int, respond_all: bool = False) -> tuple[int, int]:
    """``(servers * U1(n/s), servers * D1(n/s))`` with per-server U1, D1."""
    down = protocol.download_bits(part_len) * (protocol.k if respond_all else 1)
    return servers * protocol.upload_bits(part_len), servers * down


def accounting_check(session: Session, protocol: LinearPirProtocol, part_len: int, m: int) -> AccountingReport:
    """Counters against ``m U1(n/s)`` and ``m D1(n/s)`` (minus dead servers)."""
    up, down = expected_traffic(protocol, part_len, m - len(session.failed), session.respond_all)
    ok = session.uploaded_bits == up and session.downloaded_bits == down
    return AccountingReport(ok, session.uploaded_bits, session.downloaded_bits, up, down)


# --- privacy ----------------------------------------------------------------


def envelope_multiset(
    store: CodedStore,
    protocol: LinearPirProtocol,
    h: int,
    i: int,
    permute: bool = True,
    respond_all: bool = False,
) -> tuple[Counter, int]:
    """Server ``h``'s envelope over every tape, ``sigma`` and dummy draw.

    Dummies are enumerated as (slot, query) over ``range(k) x GF(q)^L``;
    the base protocol's dummy law must be uniform for this to be the true
    distribution, which holds for the XOR protocols.
    """
    k, L, F = protocol.k, store.part_len, store.field
    part, offset = store.locate(i)
    roles = server_roles(choose_witnesses(store.code, part, k), store.m)
    n_tapes = tape_space_size(F, protocol.tape_length(L))
    n_perm = math.factorial(k)
    if n_tapes * n_perm > EXACT_SPACE_LIMIT:
        raise RetrievalError(f"randomness space {n_tapes}*{n_perm} exceeds {EXACT_SPACE_LIMIT}")
    dummy_space = k * F.q**L
    out: Counter = Counter()
    if roles[h] is None:
        for slot in range(k):
            for q in itertools.product(range(F.q), repeat=L):
                env = make_envelope(h, None, (), (), slot, np.array(q, dtype=np.uint8), respond_all, permute)
                out[env.key()] += n_tapes * n_perm
        return out, n_tapes * n_perm * dummy_space
    perms = list(itertools.permutations(range(k)))
    zero = np.zeros(L, dtype=np.uint8)
    for tape in enumerate_tapes(F, protocol.tape_length(L)):
        queries = protocol.query(L, offset, tape)
        for sigma in perms:
            env = make_envelope(h, roles[h], queries, sigma, 0, zero, respond_all, permute)
            out[env.key()] += dummy_space
    return out, n_tapes * n_perm * dummy_space


def coded_privacy_audit(
    store: CodedStore,
    protocol: LinearPirProtocol,
    h: int,
    i1: int,
    i2: int,
    permute: bool = True,
    respond_all: bool = False,
) -> AuditVerdict:
    """Exact comparison of server ``h``'s envelope law for targets ``i1``, ``i2``."""
    a, space = envelope_multiset(store, protocol, h, i1, permute, respond_all)
    b = a if i1 == i2 else envelope_multiset(store, protocol, h, i2, permute, respond_all)[0]
    return AuditVerdict(a == b, "exact", space, total_variation(a, b))


# --- worked example trace ---------------------------------------------------


def _chunk_label(code: PirCode, h: int) -> str:
    F = code.field
    terms = []
    for r in range(code.s):
        a = int(code.G.data[r, h])
        if a:
            terms.append(f"x{r + 1}" if a == 1 else f"{F.format(a)}*x{r + 1}")
    body = "+".join(terms) if terms else "0"
    return body if len(terms) == 1 and terms[0].startswith("x") else f"c{h + 1}={body}"


def _trace_witnesses(code: PirCode, part: int, k: int) -> list[RecoverySet]:
    # singleton (systematic) set first, as in the usual write-up
    return sorted(choose_witnesses(code, part, k), key=lambda R: (len(R) > 1, R.columns))


def trace_rows(code: PirCode, part: int, k: int) -> list[tuple[int, str, str]]:
    """``(server, query, response)`` rows for retrieving from ``part`` with ``sigma = id``.

    Servers and parts are printed 1-based, matching the usual write-up of
    this walkthrough.
    """
    wit = _trace_witnesses(code, part, k)
    rows = []
    for h, j in sorted((h, j) for j, R in enumerate(wit) for h in R.columns):
        rows.append((h + 1, f"q{j + 1}", f"a{h + 1} = A({k},{j + 1},{_chunk_label(code, h)},q{j + 1})"))
    return rows


def trace_combinations(code: PirCode, part: int, k: int) -> list[str]:
    """How each ``a'_j`` is formed from raw answers (1-based labels)."""
    F = code.field
    out = []
    for j, R in enumerate(_trace_witnesses(code, part, k)):
        terms = "+".join(f"a{h + 1}" if c == 1 else f"{F.format(c)}*a{h + 1}" for h, c in R.members)
        out.append(f"a{j + 1}' = {terms} = A({k},{j + 1},x{part + 1},q{j + 1})")
    return out


def format_trace(code: PirCode, part: int, k: int) -> str:
    rows = [("Server", "Query", "Response")] + [(str(a), b, c) for a, b, c in trace_rows(code, part, k)]
    w = [max(len(r[c]) for r in rows) for c in range(3)]
    lines = [" | ".join(r[c].ljust(w[c]) for c in range(3)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * x for x in w))
    return "\n".join(lines + [""] + trace_combinations(code, part, k)) + "\n"
