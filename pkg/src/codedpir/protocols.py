"""Linear k-server PIR protocols: the (Q, A, C) contract and XOR instances.

A protocol is linear when each server's answer is additive in the database,
which is all the coded emulation needs.  Randomness always comes from an
injected :class:`RandomTape`, so a privacy audit can swap the generator for
an exhaustive walk over every possible tape.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .gf import GF2, FieldSpec

EXACT_SPACE_LIMIT = 2**20


class ProtocolError(ValueError):
    """Bad arguments to a protocol (index range, server count, tape)."""


class TapeExhausted(ProtocolError):
    """An explicit tape ran out of values."""


class RandomTape:
    """Field elements consumed by one session, seeded or explicit.

    A seeded tape draws from a numpy generator.  An explicit tape replays a
    fixed sequence (one point of the randomness space) and fails loudly if
    a protocol asks for more than was supplied.  Every draw is logged.
    """

    def __init__(self, field: FieldSpec = GF2, rng: np.random.Generator | None = None, values=None):
        if (rng is None) == (values is None):
            raise ProtocolError("give exactly one of rng or values")
        self.field = field
        self._rng = rng
        self._values = None if values is None else np.asarray(values, dtype=np.uint8).ravel()
        self._pos = 0
        self.log: list[np.ndarray] = []

    @classmethod
    def seeded(cls, seed, field: FieldSpec = GF2) -> "RandomTape":
        return cls(field, rng=np.random.default_rng(seed))

    @classmethod
    def explicit(cls, values, field: FieldSpec = GF2) -> "RandomTape":
        return cls(field, values=values)

    @property
    def consumed(self) -> int:
        return self._pos

    def draw(self, count: int) -> np.ndarray:
        if self._values is not None:
            if self._pos + count > self._values.size:
                raise TapeExhausted(f"tape holds {self._values.size} values, asked for {self._pos + count}")
            out = self._values[self._pos : self._pos + count].copy()
        else:
            out = self.field.random(self._rng, count)
        self._pos += count
        self.log.append(out)
        return out

    def choice(self, n: int) -> int:
        """Uniform integer in ``range(n)`` (seeded tapes only)."""
        if self._rng is None:
            raise ProtocolError("explicit tapes only carry field elements")
        return int(self._rng.integers(0, n))

    def spawn(self, count: int) -> list["RandomTape"]:
        """Independent child tapes, one per consumer (seeded tapes only)."""
        if self._rng is None:
            raise ProtocolError("cannot split an explicit tape")
        return [RandomTape(self.field, rng=g) for g in self._rng.spawn(count)]


def tape_space_size(field: FieldSpec, length: int) -> int:
    return field.q**length


def enumerate_tapes(field: FieldSpec, length: int, limit: int = EXACT_SPACE_LIMIT) -> Iterator[RandomTape]:
    """Every explicit tape of ``length`` field elements, each exactly once."""
    if tape_space_size(field, length) > limit:
        raise ProtocolError(f"randomness space {field.q}^{length} exceeds {limit}")
    for values in itertools.product(range(field.q), repeat=length):
        yield RandomTape.explicit(values, field)


class LinearPirProtocol(ABC):
    """The (Q, A, C) triple of a linear k-server PIR protocol.

    Queries are length-``n`` vectors over ``field``.  Each answer is
    ``answer_length`` field elements.  ``upload_bits`` and ``download_bits``
    are the costs for a single server.
    """

    name = "linear"
    answer_length = 1

    def __init__(self, k: int, field: FieldSpec = GF2):
        if k < 1:
            raise ProtocolError("need k >= 1")
        self.k = k
        self.field = field

    def __repr__(self) -> str:
        return f"{type(self).__name__}(k={self.k}, q={self.field.q})"

    def _check(self, n: int, i: int):
        if n < 1:
            raise ProtocolError("database length must be positive")
        if not 0 <= i < n:
            raise ProtocolError(f"index {i} out of range for n={n}")

    @abstractmethod
    def tape_length(self, n: int) -> int:
        """Field elements ``query`` consumes from the tape."""

    @abstractmethod
    def query(self, n: int, i: int, tape: RandomTape) -> list[np.ndarray]:
        """The ``k`` queries for retrieving position ``i`` of a length-``n`` database."""

    def answer(self, j: int, data, query) -> np.ndarray:
        """Server ``j``'s response to ``query`` on ``data``."""
        return self.answer_batch(j, np.asarray(data, dtype=np.uint8)[None, :], query)[0]

    def answer_batch(self, j: int, chunks, query) -> np.ndarray:
        """Answers for several same-length chunks under one query, shape ``(r, answer_length)``."""
        chunks = np.asarray(chunks, dtype=np.uint8)
        return self.field.matmul(chunks, np.asarray(query, dtype=np.uint8)[:, None])

    @abstractmethod
    def reconstruct(self, i: int, answers: Sequence) -> int:
        """Combine the ``k`` answers into ``x_i``."""

    def query_batch(self, n: int, i: int, tapes) -> np.ndarray:
        """Queries for every row of ``tapes`` at once, shape ``(T, k, n)``."""
        return np.stack([np.stack(self.query(n, i, RandomTape.explicit(row, self.field))) for row in tapes])

    def answer_rows(self, slots, data, queries) -> np.ndarray:
        """Answers to many ``(slot, query)`` pairs on one chunk, shape ``(T, answer_length)``."""
        return np.stack([self.answer(int(t), data, q) for t, q in zip(slots, queries)])

    def reconstruct_batch(self, i: int, answers) -> np.ndarray:
        """:meth:`reconstruct` over ``answers`` of shape ``(T, k, answer_length)``."""
        return np.array([self.reconstruct(i, list(a)) for a in answers], dtype=np.uint8)

    def dummy_query(self, n: int, tape: RandomTape) -> np.ndarray:
        """A query with the same marginal law as any real one (uniform here)."""
        return tape.draw(n)

    def upload_bits(self, n: int) -> int:
        return n * self.field.bits

    def download_bits(self, n: int) -> int:
        return self.answer_length * self.field.bits

    def run(self, x, i: int, tape: RandomTape) -> int:
        """One full retrieval against a replicated database ``x``."""
        x = np.asarray(x, dtype=np.uint8)
        qs = self.query(len(x), i, tape)
        return self.reconstruct(i, [self.answer(j, x, q) for j, q in enumerate(qs)])


class XorProtocol(LinearPirProtocol):
    """Additive sharing of ``e_i``: ``k - 1`` uniform queries plus a balancing one.

    ``q_k = e_i - (q_1 + ... + q_{k-1})``.  Each server returns ``q_j . x``
    and the answers sum to ``x_i``.  Any ``k - 1`` queries are jointly
    uniform, so even ``k - 1`` colluding servers learn nothing about ``i``.
    """

    name = "xork"

    def __init__(self, k: int, field: FieldSpec = GF2):
        if k < 2:
            raise ProtocolError("the additive protocol needs k >= 2")
        super().__init__(k, field)

    def tape_length(self, n: int) -> int:
        return (self.k - 1) * n

    def query(self, n: int, i: int, tape: RandomTape) -> list[np.ndarray]:
        self._check(n, i)
        F = self.field
        qs = [tape.draw(n) for _ in range(self.k - 1)]
        last = np.zeros(n, dtype=np.uint8)
        last[i] = 1
        for q in qs:
            last = F.vsub(last, q)
        return qs + [np.asarray(last, dtype=np.uint8)]

    def query_batch(self, n: int, i: int, tapes) -> np.ndarray:
        self._check(n, i)
        F = self.field
        tapes = np.asarray(tapes, dtype=np.uint8)
        rand = tapes[:, : (self.k - 1) * n].reshape(len(tapes), self.k - 1, n)
        last = np.zeros((len(tapes), n), dtype=np.uint8)
        last[:, i] = 1
        for j in range(self.k - 1):
            last = F.vsub(last, rand[:, j])
        return np.concatenate([rand, last[:, None]], axis=1)

    def answer_rows(self, slots, data, queries) -> np.ndarray:
        # the answer does not depend on the slot
        return self.field.matmul(np.asarray(queries, dtype=np.uint8), np.asarray(data, dtype=np.uint8)[:, None])

    def reconstruct(self, i: int, answers: Sequence) -> int:
        if len(answers) != self.k:
            raise ProtocolError(f"expected {self.k} answers, got {len(answers)}")
        return int(self.field.sum(np.concatenate([np.atleast_1d(a) for a in answers])))

    def reconstruct_batch(self, i: int, answers) -> np.ndarray:
        answers = np.asarray(answers, dtype=np.uint8)
        return self.field.sum(answers.reshape(len(answers), -1), axis=1)


def xor2(field: FieldSpec = GF2) -> XorProtocol:
    """The two-server scheme: queries ``a`` and ``a + e_i``."""
    return XorProtocol(2, field)


def xork(k: int, field: FieldSpec = GF2) -> XorProtocol:
    return XorProtocol(k, field)


class AffineXorProtocol(XorProtocol):
    """Answers ``q . x + 1``: correct on a replicated database when k is even, but not linear.

    Exists only as a counterexample for the linearity self-test and the
    coded emulation.
    """

    name = "affine"

    def answer_batch(self, j: int, chunks, query) -> np.ndarray:
        base = super().answer_batch(j, chunks, query)
        return self.field.vadd(base, np.ones_like(base))

    def answer_rows(self, slots, data, queries) -> np.ndarray:
        base = super().answer_rows(slots, data, queries)
        return self.field.vadd(base, np.ones_like(base))


PROTOCOLS = {"xork": XorProtocol, "affine": AffineXorProtocol}


def make_protocol(name: str, k: int, field: FieldSpec = GF2) -> LinearPirProtocol:
    if name == "xor2":
        return xor2(field)
    try:
        return PROTOCOLS[name](k, field)
    except KeyError:
        raise ProtocolError(f"unknown protocol {name!r}") from None


# --- self-tests -------------------------------------------------------------


@dataclass(frozen=True)
class LinearityReport:
    ok: bool
    trials: int
    server: int | None = None
    query: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def linearity_selftest(p: LinearPirProtocol, n: int, trials: int = 200, seed=0) -> LinearityReport:
    """Sample ``x1, x2, i`` and a tape; check additivity on every server."""
    rng = np.random.default_rng(seed)
    F = p.field
    for t in range(trials):
        x1, x2 = F.random(rng, n), F.random(rng, n)
        i = int(rng.integers(0, n))
        tape = RandomTape(F, rng=rng)
        for j, q in enumerate(p.query(n, i, tape)):
            lhs = p.answer(j, F.vadd(x1, x2), q)
            rhs = F.vadd(p.answer(j, x1, q), p.answer(j, x2, q))
            if not np.array_equal(lhs, rhs):
                return LinearityReport(False, t + 1, j, tuple(int(a) for a in q))
    return LinearityReport(True, trials)


@dataclass(frozen=True)
class AuditVerdict:
    """Outcome of comparing one server's view for two target indices."""

    identical: bool
    mode: str
    space: int
    distance: float = 0.0
    threshold: float = 0.0

    def __bool__(self) -> bool:
        return self.identical


def total_variation(a: Counter, b: Counter) -> float:
    na, nb = sum(a.values()), sum(b.values())
    return 0.5 * sum(abs(a[key] / na - b[key] / nb) for key in set(a) | set(b))


def _query_key(q) -> bytes:
    return np.asarray(q, dtype=np.uint8).tobytes()


def query_multiset(p: LinearPirProtocol, j: int, n: int, i: int) -> Counter:
    """Server ``j``'s query over the whole tape space for index ``i``."""
    return Counter(_query_key(p.query(n, i, t)[j]) for t in enumerate_tapes(p.field, p.tape_length(n)))


def privacy_audit(
    p: LinearPirProtocol,
    j: int,
    n: int,
    i1: int,
    i2: int,
    mode: str = "exact",
    samples: int = 20_000,
    threshold: float = 0.1,
    seed=0,
) -> AuditVerdict:
    """Is server ``j``'s query distribution the same for ``i1`` and ``i2``?

    ``exact`` enumerates every tape and compares multisets.  ``sampled``
    draws ``samples`` tapes per index and accepts when the empirical total
    variation distance is at most ``threshold``.  The sampled estimate is
    only meaningful when ``samples`` is large against the number of
    distinct queries (``q**n``).
    """
    if not 0 <= j < p.k:
        raise ProtocolError(f"server {j} out of range")
    space = tape_space_size(p.field, p.tape_length(n))
    if mode == "exact":
        if space > EXACT_SPACE_LIMIT:
            raise ProtocolError(f"randomness space {space} exceeds {EXACT_SPACE_LIMIT}")
        a = query_multiset(p, j, n, i1)
        b = a if i1 == i2 else query_multiset(p, j, n, i2)
        return AuditVerdict(a == b, mode, space, total_variation(a, b))
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        views = []
        for i in (i1, i2):
            views.append(Counter(_query_key(p.query(n, i, RandomTape(p.field, rng=rng))[j]) for _ in range(samples)))
        d = total_variation(*views)
        return AuditVerdict(d <= threshold, mode, space, d, threshold)
    raise ProtocolError(f"unknown audit mode {mode!r}")
