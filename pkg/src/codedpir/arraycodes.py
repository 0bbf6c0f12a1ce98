"""PIR array codes: every server (column) stores several coded cells.

A cell holds the XOR of a subset of the ``s_total`` message parts.  A
recovery set for bit ``i`` is a set of columns together with a recipe: the
cells inside those columns whose XOR is ``x_i``.  Retrieval sends one query
per column, and each column answers once per cell.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .emulation import (
    Database,
    Envelope,
    RetrievalError,
    make_envelope,
    server_roles,
)
from .gf import GF2
from .packing import max_set_packing
from .protocols import LinearPirProtocol, RandomTape

ARRAY_SEARCH_GUARD = 30


class ArrayCodeError(ValueError):
    """Malformed array code or unsupported parameters."""


@dataclass(frozen=True)
class ArrayRecipe:
    """Cells ``(column, row)`` whose XOR is the target bit."""

    terms: tuple[tuple[int, int], ...]

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(sorted({c for c, _ in self.terms}))

    def __str__(self) -> str:
        return "{" + ",".join(str(c) for c in self.columns) + "}"


@dataclass(frozen=True)
class ArrayReport:
    ok: bool
    bit: int | None = None
    set_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "pass" if self.ok else f"fail: bit {self.bit}, set {self.set_index}: {self.reason}"


@dataclass(frozen=True)
class ArrayCode:
    """``m1 x m2`` grid of XOR cells over ``s_total`` bits, with witnesses."""

    m1: int
    m2: int
    s_total: int
    cells: tuple[tuple[tuple[int, ...], ...], ...]  # cells[row][col] -> sorted bit indices
    witnesses: tuple[tuple[ArrayRecipe, ...], ...] = ()
    name: str = ""

    @property
    def k(self) -> int:
        return min((len(w) for w in self.witnesses), default=0)

    @property
    def overhead(self) -> Fraction:
        """Stored cells per message part."""
        return Fraction(self.m1 * self.m2, self.s_total)

    @property
    def per_server_ratio(self) -> Fraction:
        """``s`` such that each server stores ``n / s`` bits."""
        return Fraction(self.s_total, self.m1)

    def cell_mask(self, col: int, row: int) -> int:
        out = 0
        for b in self.cells[row][col]:
            out ^= 1 << b
        return out

    def column_masks(self, col: int) -> list[int]:
        return [self.cell_mask(col, r) for r in range(self.m1)]

    def delete_columns(self, cols: Iterable[int]) -> "ArrayCode":
        """Drop columns; witnesses touching them are dropped too."""
        gone = set(cols)
        keep = [c for c in range(self.m2) if c not in gone]
        relabel = {c: t for t, c in enumerate(keep)}
        cells = tuple(tuple(row[c] for c in keep) for row in self.cells)
        ws = tuple(
            tuple(ArrayRecipe(tuple((relabel[c], r) for c, r in R.terms)) for R in sets if not gone.intersection(R.columns))
            for sets in self.witnesses
        )
        return ArrayCode(self.m1, len(keep), self.s_total, cells, ws, f"{self.name}-del")

    def to_json(self) -> dict:
        return {
            "m1": self.m1,
            "m2": self.m2,
            "s_total": self.s_total,
            "cells": [[list(c) for c in row] for row in self.cells],
            "witnesses": [[[list(t) for t in R.terms] for R in sets] for sets in self.witnesses],
            "name": self.name,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "ArrayCode":
        cells = tuple(tuple(tuple(int(b) for b in c) for c in row) for row in obj["cells"])
        ws = tuple(tuple(ArrayRecipe(tuple((int(c), int(r)) for c, r in R)) for R in sets) for sets in obj["witnesses"])
        return cls(int(obj["m1"]), int(obj["m2"]), int(obj["s_total"]), cells, ws, obj.get("name", ""))

    @classmethod
    def loads(cls, text: str) -> "ArrayCode":
        return cls.from_json(json.loads(text))


def array_verify(code: ArrayCode) -> ArrayReport:
    """Shape, per-bit disjointness and recipe sums."""
    if len(code.cells) != code.m1 or any(len(row) != code.m2 for row in code.cells):
        return ArrayReport(False, reason="cell grid has the wrong shape")
    if any(not 0 <= b < code.s_total for row in code.cells for c in row for b in c):
        return ArrayReport(False, reason="cell refers to a missing bit")
    if len(code.witnesses) != code.s_total:
        return ArrayReport(False, reason="need one witness list per bit")
    for i, sets in enumerate(code.witnesses):
        used: set[int] = set()
        for j, R in enumerate(sets):
            if not R.terms:
                return ArrayReport(False, i, j, "empty recipe")
            if any(not (0 <= c < code.m2 and 0 <= r < code.m1) for c, r in R.terms):
                return ArrayReport(False, i, j, "cell out of range")
            if used.intersection(R.columns):
                return ArrayReport(False, i, j, "columns overlap an earlier set")
            used.update(R.columns)
            acc = 0
            for c, r in R.terms:
                acc ^= code.cell_mask(c, r)
            if acc != 1 << i:
                return ArrayReport(False, i, j, "recipe does not sum to the target bit")
    return ArrayReport(True)


def _checked(code: ArrayCode) -> ArrayCode:
    rep = array_verify(code)
    if not rep:
        raise ArrayCodeError(f"{code.name}: bit {rep.bit}, set {rep.set_index}: {rep.reason}")
    return code


# --- constructions ----------------------------------------------------------


def _witnesses_from_layout(s_total: int, t: int, singles: list[tuple[int, ...]], sums: list[list[tuple[int, ...]]]) -> list[list[ArrayRecipe]]:
    """Recipes for the single-tuple / sum-column layout.

    A single column containing ``i`` recovers it alone.  Any other single
    column ``T`` pairs with the sum column holding ``T + {i}``.
    """
    col_of_single = {T: c for c, T in enumerate(singles)}
    off = len(singles)
    where = {}
    for c, col in enumerate(sums):
        for r, S in enumerate(col):
            where[S] = (off + c, r)
    ws = []
    for i in range(s_total):
        sets = []
        for T, c in col_of_single.items():
            if i in T:
                sets.append(ArrayRecipe(((c, T.index(i)),)))
            else:
                sc, sr = where[tuple(sorted(T + (i,)))]
                sets.append(ArrayRecipe(tuple((c, r) for r in range(t)) + ((sc, sr),)))
        ws.append(sorted(sets, key=lambda R: R.columns))
    return ws


def _layout_code(t: int, sums: list[list[tuple[int, ...]]], name: str) -> ArrayCode:
    s_total = t * (t + 1)
    singles = list(itertools.combinations(range(s_total), t))
    cols = [list(T) for T in singles] + [list(col) for col in sums]
    cells = tuple(tuple(tuple(sorted(cols[c][r])) if isinstance(cols[c][r], tuple) else (cols[c][r],) for c in range(len(cols))) for r in range(t))
    ws = _witnesses_from_layout(s_total, t, singles, sums)
    return _checked(ArrayCode(t, len(cols), s_total, cells, tuple(tuple(w) for w in ws), name))


def complement_pairing(t: int = 2) -> list[list[tuple[int, ...]]]:
    """Sum columns for ``t = 2``: each triple of [6] with its complement."""
    if t != 2:
        raise ArrayCodeError("complement pairing needs t = 2")
    full = set(range(6))
    return [[S, tuple(sorted(full - set(S)))] for S in itertools.combinations(range(6), 3) if 0 in S]


def baranyai_partition(n: int, a: int) -> list[list[tuple[int, ...]]]:
    """Split all ``a``-subsets of ``[n]`` into perfect matchings (``a | n``).

    Points are added one at a time.  Each class keeps ``n / a`` partial
    sets; a max-flow picks, for every class, which partial set receives the
    new point, with each partial set ``S`` extended exactly
    ``C(n - j - 1, a - |S| - 1)`` times over all classes.  Integral flows
    exist because a fractional one does.
    """
    if n % a:
        raise ArrayCodeError("a must divide n")
    M = math.comb(n - 1, a - 1)
    classes: list[list[tuple[int, ...]]] = [[()] * (n // a) for _ in range(M)]
    for j in range(n):
        g = nx.DiGraph()
        need: dict[tuple[int, ...], int] = {}
        for p, cls in enumerate(classes):
            g.add_edge("src", ("P", p), capacity=1)
            for S in set(cls):
                if len(S) < a:
                    g.add_edge(("P", p), ("S", S), capacity=cls.count(S))
                    need[S] = math.comb(n - j - 1, a - len(S) - 1)
        for S, cap in need.items():
            g.add_edge(("S", S), "sink", capacity=cap)
        value, flow = nx.maximum_flow(g, "src", "sink")
        if value != M:
            raise ArrayCodeError("flow step failed; no resolution found")
        for p, cls in enumerate(classes):
            (S,) = [node[1] for node, f in flow[("P", p)].items() if f > 0]
            cls[cls.index(S)] = S + (j,)
    out = [sorted(cls) for cls in classes]
    return sorted(out)


def apir(t: int) -> ArrayCode:
    """The ``t x m2`` array code on ``t(t + 1)`` bits with ``k = C(t(t+1), t)``.

    Single columns hold every ``t``-subset of bits; each sum column holds
    ``t`` sums of ``t + 1`` bits that partition all the bits.  ``t = 2``
    uses complement pairs and ``t = 3`` a flow-built resolution.
    """
    if t == 2:
        sums = complement_pairing(2)
    elif t == 3:
        sums = baranyai_partition(12, 4)
    else:
        raise ArrayCodeError("only t = 2 and t = 3 are built")
    return _layout_code(t, sums, f"apir({t})")


def apir_parameters(t: int) -> dict:
    """Closed-form ``m1, m2, k, s`` and overhead for the array family."""
    st = t * (t + 1)
    if math.comb(st, t + 1) % t:
        raise ArrayCodeError("sum columns do not divide evenly")
    k = math.comb(st, t)
    m2 = k + math.comb(st, t + 1) // t
    return {"t": t, "s": t + 1, "m1": t, "m2": m2, "k": k, "overhead": Fraction(m2, t + 1)}


# Columns 16-25: top row a triple containing bit 0, bottom row its complement.
_EXAMPLE_SUMS = [
    [(0, 1, 2), (3, 4, 5)],
    [(0, 1, 3), (2, 4, 5)],
    [(0, 1, 4), (2, 3, 5)],
    [(0, 1, 5), (2, 3, 4)],
    [(0, 2, 3), (1, 4, 5)],
    [(0, 2, 4), (1, 3, 5)],
    [(0, 2, 5), (1, 3, 4)],
    [(0, 3, 4), (1, 2, 5)],
    [(0, 3, 5), (1, 2, 4)],
    [(0, 4, 5), (1, 2, 3)],
]


def example_2x25() -> ArrayCode:
    """The ``[2 x 25, 6]`` 15-server array code, written out cell by cell."""
    return _layout_code(2, [list(c) for c in _EXAMPLE_SUMS], "example-2x25")


def example_7x4() -> ArrayCode:
    """Twelve parts on four servers, seven cells each; a 3-server array code.

    Each group of three parts ``a, b, c`` is stored as the pairs
    ``{a, b}, {b, c}, {c, a}`` on three servers and ``a + b + c`` on the
    fourth, rotated so every server holds seven cells.
    """
    raw = [
        [(0,), (1,), (2,), (0, 1, 2)],
        [(1,), (2,), (0,), (5,)],
        [(3,), (4,), (3, 4, 5), (3,)],
        [(4,), (5,), (7,), (8,)],
        [(6,), (6, 7, 8), (8,), (6,)],
        [(7,), (10,), (10,), (11,)],
        [(9, 10, 11), (9,), (11,), (9,)],
    ]
    cells = tuple(tuple(row) for row in raw)
    code = ArrayCode(7, 4, 12, cells, (), "example-7x4")
    ws = []
    for i in range(12):
        k, wit = array_max_k(code, i)
        ws.append(tuple(wit))
    return _checked(ArrayCode(7, 4, 12, cells, tuple(ws), "example-7x4"))


def identity_array(s: int) -> ArrayCode:
    """``1 x s`` array storing each bit once."""
    cells = (tuple((b,) for b in range(s)),)
    ws = tuple((ArrayRecipe(((b, 0),)),) for b in range(s))
    return _checked(ArrayCode(1, s, s, cells, ws, f"identity({s})"))


# --- exhaustive search ------------------------------------------------------


def _reduce(v: int, basis: dict[int, int]) -> int:
    while v:
        top = v.bit_length() - 1
        if top not in basis:
            return v
        v ^= basis[top]
    return 0


def _insert(v: int, basis: dict[int, int]) -> dict[int, int] | None:
    r = _reduce(v, basis)
    if not r:
        return None
    nb = dict(basis)
    nb[r.bit_length() - 1] = r
    return nb


def _recipe_for(code: ArrayCode, cols: Sequence[int], target: int) -> ArrayRecipe:
    cells = [(c, r) for c in cols for r in range(code.m1)]
    masks = [code.cell_mask(c, r) for c, r in cells]
    # Gaussian elimination tracking which cells make up each basis vector.
    basis: dict[int, tuple[int, int]] = {}
    for t, v in enumerate(masks):
        combo = 1 << t
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = (v, combo)
                break
            bv, bc = basis[top]
            v, combo = v ^ bv, combo ^ bc
    v, combo = target, 0
    while v:
        top = v.bit_length() - 1
        bv, bc = basis[top]
        v, combo = v ^ bv, combo ^ bc
    return ArrayRecipe(tuple(cells[t] for t in range(len(cells)) if combo >> t & 1))


def minimal_column_sets(code: ArrayCode, i: int) -> list[int]:
    """Inclusion-minimal column sets whose cells span ``e_i`` (as bitmasks)."""
    if code.m2 > ARRAY_SEARCH_GUARD:
        raise ArrayCodeError(f"array search limited to m2 <= {ARRAY_SEARCH_GUARD}")
    target = 1 << i
    colmasks = [code.column_masks(c) for c in range(code.m2)]
    found: list[int] = []

    def dfs(start: int, basis: dict[int, int], chosen: int):
        for c in range(start, code.m2):
            nb = basis
            grew = False
            for v in colmasks[c]:
                b2 = _insert(v, nb)
                if b2 is not None:
                    nb, grew = b2, True
            if not grew:
                continue  # adds nothing to the span: never part of a minimal set
            mask = chosen | (1 << c)
            if any(f & mask == f for f in found):
                continue
            if _reduce(target, nb) == 0:
                found.append(mask)
            elif len(nb) < code.s_total:
                dfs(c + 1, nb, mask)

    dfs(0, {}, 0)
    # DFS order can record a set before a subset of it; keep minimal ones.
    found = sorted(set(found), key=lambda x: (bin(x).count("1"), x))
    out: list[int] = []
    for f in found:
        if not any(g & f == g for g in out):
            out.append(f)
    return out


def array_max_k(code: ArrayCode, i: int) -> tuple[int, list[ArrayRecipe]]:
    """Largest number of disjoint column sets that can each rebuild bit ``i``."""
    sets = minimal_column_sets(code, i)
    chosen = max_set_packing(sets)
    out = []
    for t in chosen:
        cols = [c for c in range(code.m2) if sets[t] >> c & 1]
        out.append(_recipe_for(code, cols, 1 << i))
    return len(out), sorted(out, key=lambda R: R.columns)


# --- storage and retrieval --------------------------------------------------


@dataclass(frozen=True)
class ArrayStore:
    code: ArrayCode
    chunks: np.ndarray  # shape (m2, m1, part_len)
    n: int

    @property
    def part_len(self) -> int:
        return self.chunks.shape[2]

    def locate(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.code.s_total * self.part_len:
            raise RetrievalError(f"index {i} out of range")
        return divmod(i, self.part_len)


def array_distribute(db: Database, code: ArrayCode) -> ArrayStore:
    """Cut ``db`` into ``s_total`` parts and fill every cell with its XOR."""
    if db.s != code.s_total:
        raise ArrayCodeError(f"database has {db.s} parts, code expects {code.s_total}")
    if db.field != GF2:
        raise ArrayCodeError("array codes are binary")
    parts = db.parts
    chunks = np.zeros((code.m2, code.m1, db.part_len), dtype=np.uint8)
    for r in range(code.m1):
        for c in range(code.m2):
            for b in code.cells[r][c]:
                chunks[c, r] ^= parts[b]
    chunks.setflags(write=False)
    return ArrayStore(code, chunks, db.n)


@dataclass
class ArraySession:
    index: int
    part: int
    offset: int
    witnesses: tuple[ArrayRecipe, ...]
    sigma: tuple[int, ...]
    envelopes: dict[int, Envelope]
    answers: dict[int, np.ndarray] = field(default_factory=dict)
    uploaded_bits: int = 0
    downloaded_bits: int = 0


def array_plan(
    code: ArrayCode,
    part_len: int,
    protocol: LinearPirProtocol,
    i: int,
    rng: np.random.Generator | int | None = None,
) -> ArraySession:
    """Base queries, ``sigma`` and one envelope per column (dummies included)."""
    k = protocol.k
    if not 0 <= i < code.s_total * part_len:
        raise RetrievalError(f"index {i} out of range")
    part, offset = divmod(i, part_len)
    if k > len(code.witnesses[part]):
        raise RetrievalError(f"protocol needs k={k}, bit {part} has {len(code.witnesses[part])} sets")
    wit = tuple(code.witnesses[part][:k])
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    main, *per_server = rng.spawn(code.m2 + 1)
    queries = protocol.query(part_len, offset, RandomTape(GF2, rng=main))
    sigma = tuple(int(a) for a in main.permutation(k))
    roles = server_roles(wit, code.m2)
    envelopes = {}
    for h in range(code.m2):
        g = per_server[h]
        slot = int(g.integers(0, k))
        envelopes[h] = make_envelope(h, roles[h], queries, sigma, slot, protocol.dummy_query(part_len, RandomTape(GF2, rng=g)))
    return ArraySession(i, part, offset, wit, sigma, envelopes)


def array_record(session: ArraySession, h: int, answer) -> None:
    """Store column ``h``'s per-cell answers (shape ``(m1, answer_length)``)."""
    ans = np.asarray(answer, dtype=np.uint8)
    session.answers[h] = ans
    session.uploaded_bits += session.envelopes[h].query.size
    session.downloaded_bits += ans.size


def array_finish(session: ArraySession, protocol: LinearPirProtocol) -> int:
    """Evaluate each witness recipe on the cell answers and reconstruct."""
    by_slot: list[np.ndarray | None] = [None] * protocol.k
    for j, R in enumerate(session.witnesses):
        acc = np.zeros(protocol.answer_length, dtype=np.uint8)
        for c, r in R.terms:
            if c not in session.answers:
                raise RetrievalError(f"missing answer from column {c}")
            acc ^= session.answers[c][r]
        by_slot[session.sigma[j]] = acc
    return protocol.reconstruct(session.offset, by_slot)


def array_retrieve(
    store: ArrayStore,
    protocol: LinearPirProtocol,
    i: int,
    rng: np.random.Generator | int | None = None,
) -> tuple[int, ArraySession]:
    """Coded retrieval where each column answers once per stored cell."""
    session = array_plan(store.code, store.part_len, protocol, i, rng)
    for h, env in session.envelopes.items():
        array_record(session, h, protocol.answer_batch(env.slot, store.chunks[h], env.query))
    return array_finish(session, protocol), session
