"""The coset view of PIR codes (binary only).

Take a PIR generator ``G`` (``s x m``) as the parity-check matrix ``H`` of a
code ``C`` of dimension ``m - s``.  Each recovery set of ``e_i`` is then a
vector of the coset of ``C`` with syndrome ``e_i``, and the ``k`` disjoint
recovery sets are ``k`` support-disjoint vectors in that coset.  Conversely,
``s`` cosets with linearly independent syndromes, each holding ``k``
disjoint vectors, yield a generator ``S^{-1} H`` of a k-server PIR code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf import GF2, FieldMatrix, rank, rref
from .pircode import PirCode, RecoverySet


class CosetError(ValueError):
    """Dependent syndromes or overlapping coset witnesses."""


@dataclass(frozen=True)
class CosetFamily:
    """Cosets of ``C = ker H`` with disjoint witnesses.

    Attributes:
        H: Parity-check matrix of the base code, ``rows x m``.
        syndromes: One syndrome (length ``H.rows``) per coset.
        members: ``members[j]`` are support-disjoint vectors of coset ``j``,
            each given as a set of coordinates.
    """

    H: FieldMatrix
    syndromes: tuple[tuple[int, ...], ...]
    members: tuple[tuple[RecoverySet, ...], ...]

    @property
    def m(self) -> int:
        return self.H.cols

    @property
    def k(self) -> int:
        return min((len(ws) for ws in self.members), default=0)

    @classmethod
    def from_pir_code(cls, code: PirCode) -> "CosetFamily":
        if code.field.q != 2:
            raise CosetError("the coset view is implemented over GF(2) only")
        s = code.s
        syn = tuple(tuple(int(i == j) for j in range(s)) for i in range(s))
        return cls(code.G, syn, code.witnesses)


def syndrome(H: FieldMatrix, R: RecoverySet) -> np.ndarray:
    return np.bitwise_xor.reduce(H.data[:, list(R.columns)], axis=1) if len(R) else np.zeros(H.rows, np.uint8)


def bk_problems(f: CosetFamily) -> list[str]:
    """Every violated invariant of ``f`` (empty list when it is sound)."""
    out = []
    S = FieldMatrix(GF2, np.array(f.syndromes, dtype=np.int64).reshape(len(f.syndromes), f.H.rows).T)
    if len(f.syndromes) != f.H.rows:
        out.append(f"{len(f.syndromes)} cosets for {f.H.rows} parity rows")
    elif rank(S) != S.cols:
        out.append("syndromes are linearly dependent")
    if len(f.members) != len(f.syndromes):
        out.append("members and syndromes differ in count")
    for j, (syn, ws) in enumerate(zip(f.syndromes, f.members)):
        used = 0
        for R in ws:
            if R.mask & used:
                out.append(f"coset {j}: witnesses overlap")
            used |= R.mask
            if not R.columns or R.columns[-1] >= f.m:
                out.append(f"coset {j}: witness out of range")
            elif tuple(int(v) for v in syndrome(f.H, R)) != tuple(syn):
                out.append(f"coset {j}: witness {R} has the wrong syndrome")
    return out


def bk_check(f: CosetFamily) -> bool:
    """True when the family certifies property B_k with ``k = f.k``."""
    return not bk_problems(f)


def bk_to_generator(f: CosetFamily, provenance: str = "") -> PirCode:
    """Row-reduce ``[H | S]`` until the right block is the identity.

    The left block is then a generator of a k-server PIR code whose
    recovery sets are the coset witnesses.
    """
    problems = bk_problems(f)
    if problems:
        raise CosetError("; ".join(problems))
    s = f.H.rows
    S = np.array(f.syndromes, dtype=np.uint8).T
    # Reducing [S | H] to [I | H'] applies the same row operations as
    # reducing [H | S] to [H' | I].
    R, pivots, _ = rref(FieldMatrix(GF2, np.hstack([S, f.H.data])))
    assert pivots[:s] == list(range(s))
    Gp = FieldMatrix(GF2, R.data[:, s:])
    return PirCode(Gp, f.k, [ws[: f.k] for ws in f.members], provenance or "from-cosets")


def puncture_cosets(f: CosetFamily, position: int) -> CosetFamily:
    """Puncture the base code at ``position``; keep ``rows - 1`` cosets.

    The column of ``H`` at ``position`` must be nonzero.  Each witness loses
    that coordinate, which keeps the witnesses disjoint; the new syndromes
    span the smaller space, and an independent subset of them is kept.
    """
    H = f.H.data
    m = f.m
    if not 0 <= position < m:
        raise IndexError("position out of range")
    if not H[:, position].any():
        raise CosetError("cannot puncture at a zero column of H")
    rows = H.shape[0]
    # Row-reduce so column `position` becomes a unit vector; track T with [H | I].
    aug = np.hstack([H, np.eye(rows, dtype=np.uint8)]).astype(np.uint8)
    r = int(np.nonzero(aug[:, position])[0][0])
    for t in range(rows):
        if t != r and aug[t, position]:
            aug[t] ^= aug[r]
    keep_rows = [t for t in range(rows) if t != r]
    Hp = np.delete(aug[keep_rows, :m], position, axis=1)
    T = aug[:, m:]

    new_syn: list[tuple[int, ...]] = []
    new_members: list[tuple[RecoverySet, ...]] = []
    basis = FieldMatrix.zeros(0, rows - 1)
    for j, syn in enumerate(f.syndromes):
        v = (T.astype(np.int64) @ np.array(syn, dtype=np.int64)) % 2
        v = v[keep_rows]
        if not v.any():
            continue
        cand = FieldMatrix(GF2, np.vstack([basis.data, v]))
        if rank(cand) == cand.rows:
            basis = cand
            new_syn.append(tuple(int(x) for x in v))
            ws = []
            for R in f.members[j]:
                cols = [c - (c > position) for c in R.columns if c != position]
                ws.append(RecoverySet.of(cols))
            new_members.append(tuple(ws))
        if len(new_syn) == rows - 1:
            break
    return CosetFamily(FieldMatrix(GF2, Hp), tuple(new_syn), tuple(new_members))
