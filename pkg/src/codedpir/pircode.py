"""k-server PIR codes and their certificates.

A :class:`PirCode` is a generator matrix together with, for every message
coordinate ``i``, ``k`` pairwise-disjoint recovery sets.  A recovery set is
a list of ``(column, coefficient)`` pairs whose weighted column sum is the
unit vector ``e_i``.  The certificate is checked on construction, so a
``PirCode`` value is always a valid one.
"""

from __future__ import annotations

import json
from dataclasses import InitVar, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .gf import GF2, FieldMatrix, FieldSpec, gf, min_distance


class CertificateError(ValueError):
    """A PIR code certificate failed verification."""

    def __init__(self, report: "VerificationReport"):
        super().__init__(str(report))
        self.report = report


@dataclass(frozen=True, order=True)
class RecoverySet:
    """Columns (0-indexed, strictly increasing) with nonzero coefficients."""

    members: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, cols: Iterable[int], coefs: Iterable[int] | None = None) -> "RecoverySet":
        cols = list(cols)
        coefs = [1] * len(cols) if coefs is None else list(coefs)
        return cls(tuple(sorted(zip(cols, coefs))))

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.members)

    @property
    def mask(self) -> int:
        out = 0
        for c, _ in self.members:
            out |= 1 << c
        return out

    def __len__(self) -> int:
        return len(self.members)

    def shifted(self, offset: int) -> "RecoverySet":
        return RecoverySet(tuple((c + offset, a) for c, a in self.members))

    def relabeled(self, mapping: Sequence[int]) -> "RecoverySet":
        return RecoverySet(tuple(sorted((mapping[c], a) for c, a in self.members)))

    def __str__(self) -> str:
        if all(a == 1 for _, a in self.members):
            return "{" + ",".join(str(c) for c in self.columns) + "}"
        return "{" + ",".join(f"({c},{a})" for c, a in self.members) + "}"


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    i: int | None = None
    set_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return f"fail at i={self.i} set={self.set_index}: {self.reason}"


def check_certificate(
    G: FieldMatrix, k: int, witnesses: Sequence[Sequence[RecoverySet]]
) -> VerificationReport:
    """Check property A_k for generator ``G`` with the given witnesses."""
    F = G.field
    s, m = G.shape
    if s < 1 or m < s:
        return VerificationReport(False, reason=f"bad shape {s}x{m} (need 1 <= s <= m)")
    if len(witnesses) != s:
        return VerificationReport(False, reason=f"{len(witnesses)} witness lists for {s} positions")
    for i, sets in enumerate(witnesses):
        if len(sets) != k:
            return VerificationReport(False, i, None, f"{len(sets)} sets, expected {k}")
        used = 0
        target = np.zeros(s, dtype=np.uint8)
        target[i] = 1
        for j, R in enumerate(sets):
            cols = R.columns
            if not cols:
                return VerificationReport(False, i, j, "empty set")
            if any(b <= a for a, b in zip(cols, cols[1:])):
                return VerificationReport(False, i, j, "columns not strictly increasing")
            if cols[0] < 0 or cols[-1] >= m:
                return VerificationReport(False, i, j, "column out of range")
            coefs = [a for _, a in R.members]
            if any(a <= 0 or a >= F.q for a in coefs):
                return VerificationReport(False, i, j, "coefficient zero or outside the field")
            if R.mask & used:
                return VerificationReport(False, i, j, "not disjoint from earlier sets")
            used |= R.mask
            total = F.dot(G.data[:, list(cols)], np.array(coefs, dtype=np.uint8), axis=1)
            if not np.array_equal(total, target):
                return VerificationReport(False, i, j, "weighted column sum is not the unit vector")
    return VerificationReport(True)


@dataclass(frozen=True)
class PirCode:
    """Generator matrix plus a property-A_k certificate.

    Attributes:
        G: ``s x m`` generator matrix.
        k: Number of disjoint recovery sets certified for every position.
        witnesses: ``witnesses[i]`` lists the ``k`` recovery sets of ``e_i``.
        provenance: Human-readable description of how the code was built.
    """

    G: FieldMatrix
    k: int
    witnesses: tuple[tuple[RecoverySet, ...], ...]
    provenance: str = ""
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        object.__setattr__(
            self, "witnesses", tuple(tuple(sorted(ws, key=lambda R: R.columns)) for ws in self.witnesses)
        )
        if check:
            report = check_certificate(self.G, self.k, self.witnesses)
            if not report:
                raise CertificateError(report)

    @property
    def field(self) -> FieldSpec:
        return self.G.field

    @property
    def s(self) -> int:
        return self.G.rows

    @property
    def m(self) -> int:
        return self.G.cols

    @property
    def overhead(self) -> Fraction:
        return Fraction(self.m, self.s)

    def __repr__(self) -> str:
        return f"PirCode([{self.m},{self.s}] over GF({self.field.q}), k={self.k}, {self.provenance!r})"

    def with_provenance(self, provenance: str) -> "PirCode":
        return PirCode(self.G, self.k, self.witnesses, provenance, check=False)

    def to_json(self) -> dict:
        return {
            "q": self.field.q,
            "s": self.s,
            "m": self.m,
            "k": self.k,
            "G": [[int(v) for v in row] for row in self.G.data],
            "witnesses": [[[list(p) for p in R.members] for R in ws] for ws in self.witnesses],
            "provenance": self.provenance,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "PirCode":
        F = gf(int(obj.get("q", 2)))
        G = FieldMatrix(F, np.array(obj["G"], dtype=np.int64).reshape(obj["s"], obj["m"]))
        witnesses = [[RecoverySet(tuple((int(c), int(a)) for c, a in R)) for R in ws] for ws in obj["witnesses"]]
        k = int(obj.get("k", len(witnesses[0]) if witnesses else 0))
        return cls(G, k, witnesses, obj.get("provenance", ""))

    @classmethod
    def loads(cls, text: str) -> "PirCode":
        return cls.from_json(json.loads(text))


def verify(code: PirCode, check_distance: bool = False) -> VerificationReport:
    """Re-check every certificate invariant of ``code``.

    Args:
        code: The code to check.
        check_distance: Also confirm ``min_distance(G) >= k`` by enumeration.
            This is implied by the certificate, so it is off by default.
    """
    report = check_certificate(code.G, code.k, code.witnesses)
    if not report:
        return report
    if check_distance and min_distance(code.G) < code.k:
        return VerificationReport(False, reason="minimum distance below k")
    return report


def make_code(G, k: int, witnesses, provenance: str = "", field: FieldSpec = GF2) -> PirCode:
    """Build a PirCode from plain lists; bare column lists mean GF(2) sets."""
    if not isinstance(G, FieldMatrix):
        G = FieldMatrix(field, np.asarray(G))
    ws = []
    for sets in witnesses:
        row = []
        for R in sets:
            if isinstance(R, RecoverySet):
                row.append(R)
            else:
                R = list(R)
                if R and isinstance(R[0], tuple):
                    row.append(RecoverySet(tuple(sorted(R))))
                else:
                    row.append(RecoverySet.of(R))
        ws.append(row)
    return PirCode(G, k, ws, provenance)


def identity_code(s: int, field: FieldSpec = GF2) -> PirCode:
    """The uncoded ``[s, s]`` layout, certified at k = 1."""
    return PirCode(FieldMatrix.identity(s, field), 1, [[RecoverySet.of([i])] for i in range(s)], f"identity({s})")


def parity_code(s: int) -> PirCode:
    """The ``[s+1, s]`` single-parity code, certified at k = 2."""
    G = np.hstack([np.eye(s, dtype=np.int64), np.ones((s, 1), dtype=np.int64)])
    ws = [[RecoverySet.of([i]), RecoverySet.of([j for j in range(s + 1) if j != i])] for i in range(s)]
    return PirCode(FieldMatrix(GF2, G), 2, ws, f"parity({s})")


def repetition_code(k: int) -> PirCode:
    """The ``[k, 1]`` repetition code, certified at k."""
    return PirCode(FieldMatrix(GF2, np.ones((1, k), dtype=np.int64)), k, [[RecoverySet.of([j]) for j in range(k)]], f"repetition({k})")
