"""Finite fields GF(p^w) and dense matrices over them.

Elements are plain ints in ``range(q)``.  For an extension field the int is
the polynomial basis representation read as base-``p`` digits, so in
characteristic 2 the element is a bit mask and addition is XOR.

Arithmetic goes through precomputed ``q x q`` tables (``q <= 256``), which
keeps every vectorised operation a numpy fancy-indexing lookup.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

# Fixed moduli for GF(2^w); all primitive, low-weight (standard tables).
GF2_MODULI = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
}

MAX_ORDER = 256
MIN_DISTANCE_GUARD = 24


class FieldError(ArithmeticError):
    """Invalid field operation (e.g. inverting zero)."""


class DimensionError(ValueError):
    """Operand shapes do not agree, or a size guard was exceeded."""


class RankError(ValueError):
    """A full-rank matrix was required."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


def _digits(a: int, p: int, w: int) -> list[int]:
    out = []
    for _ in range(w):
        out.append(a % p)
        a //= p
    return out


def _undigits(ds: Sequence[int], p: int) -> int:
    a = 0
    for d in reversed(ds):
        a = a * p + d
    return a


def _polymulmod(a: int, b: int, p: int, w: int, modulus: int) -> int:
    da, db = _digits(a, p, w), _digits(b, p, w)
    prod = [0] * (2 * w - 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
    mod = _digits(modulus, p, w + 1)  # monic, mod[w] == 1
    for deg in range(2 * w - 2, w - 1, -1):
        c = prod[deg]
        if c:
            for t in range(w + 1):
                prod[deg - w + t] = (prod[deg - w + t] - c * mod[t]) % p
    return _undigits(prod[:w], p)


def _is_irreducible(modulus: int, p: int, w: int) -> bool:
    # No root-free test shortcut: brute force over monic divisors of degree <= w/2.
    mod = _digits(modulus, p, w + 1)
    for d in range(1, w // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            div = list(low) + [1]
            rem = mod[:]
            for deg in range(w, d - 1, -1):
                c = rem[deg]
                if c:
                    for t in range(d + 1):
                        rem[deg - d + t] = (rem[deg - d + t] - c * div[t]) % p
            if not any(rem[:d]):
                return False
    return True


def _default_modulus(p: int, w: int) -> int:
    if w == 1:
        return p  # the polynomial x; unused for prime fields
    if p == 2 and w in GF2_MODULI:
        return GF2_MODULI[w]
    for low in range(p**w):
        cand = p**w + low
        if _is_irreducible(cand, p, w):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {w} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^w) with a fixed modulus polynomial.

    Use :func:`gf` to obtain instances; it caches one spec per order.
    """

    p: int
    w: int = 1
    modulus: int = 0

    def __post_init__(self):
        if not _is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.w < 1:
            raise FieldError("extension degree must be >= 1")
        if self.p**self.w > MAX_ORDER:
            raise FieldError(f"field order {self.p ** self.w} exceeds {MAX_ORDER}")
        if self.modulus == 0:
            object.__setattr__(self, "modulus", _default_modulus(self.p, self.w))
        elif self.w > 1 and not _is_irreducible(self.modulus, self.p, self.w):
            raise FieldError(f"modulus {self.modulus} is reducible over GF({self.p})")

    @property
    def q(self) -> int:
        return self.p**self.w

    @property
    def bits(self) -> int:
        """Bits needed per element (exact for q = 2^w)."""
        return (self.q - 1).bit_length()

    def __repr__(self) -> str:
        return f"GF({self.q})"

    @cached_property
    def add_table(self) -> np.ndarray:
        q, p, w = self.q, self.p, self.w
        if p == 2:
            a = np.arange(q, dtype=np.uint8)
            return a[:, None] ^ a[None, :]
        t = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            da = _digits(a, p, w)
            for b in range(q):
                db = _digits(b, p, w)
                t[a, b] = _undigits([(x + y) % p for x, y in zip(da, db)], p)
        return t

    @cached_property
    def mul_table(self) -> np.ndarray:
        q, p, w = self.q, self.p, self.w
        t = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(a, q):
                if w == 1:
                    v = (a * b) % p
                else:
                    v = _polymulmod(a, b, p, w, self.modulus)
                t[a, b] = t[b, a] = v
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.argmin(self.add_table, axis=1).astype(np.uint8)

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.q, dtype=np.uint8)
        for a in range(1, self.q):
            inv[a] = int(np.nonzero(self.mul_table[a] == 1)[0][0])
        return inv

    @cached_property
    def primitive(self) -> int:
        """Smallest generator of the multiplicative group (alpha)."""
        for g in range(2, self.q):
            x, seen = 1, set()
            for _ in range(self.q - 1):
                x = int(self.mul_table[x, g])
                seen.add(x)
            if len(seen) == self.q - 1:
                return g
        return 1  # GF(2)

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise FieldError("inverse of zero")
        return int(self.inv_table[a])

    def pow(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = self.mul(r, a)
        return r

    def arith(self, a: int, b: int, op: str) -> int:
        """Dispatch ``add``/``mul``/``inv`` (``b`` ignored for ``inv``)."""
        for x in (a, b):
            if not 0 <= x < self.q:
                raise FieldError(f"{x} is not an element of {self!r}")
        if op == "add":
            return self.add(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "inv":
            return self.inv(a)
        raise ValueError(f"unknown op {op!r}")

    # vectorised helpers ---------------------------------------------------

    def vadd(self, a, b) -> np.ndarray:
        if self.p == 2:
            return np.bitwise_xor(a, b).astype(np.uint8)
        return self.add_table[a, b]

    def vsub(self, a, b) -> np.ndarray:
        if self.p == 2:
            return np.bitwise_xor(a, b).astype(np.uint8)
        return self.add_table[a, self.neg_table[b]]

    def vmul(self, a, b) -> np.ndarray:
        if self.q == 2:
            return np.bitwise_and(a, b).astype(np.uint8)
        return self.mul_table[a, b]

    def vneg(self, a) -> np.ndarray:
        return self.neg_table[a]

    def sum(self, a, axis: int = -1) -> np.ndarray:
        """Field sum along ``axis``."""
        a = np.asarray(a, dtype=np.uint8)
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        if self.w == 1:
            return (a.astype(np.int64).sum(axis=axis) % self.p).astype(np.uint8)
        a = np.moveaxis(a, axis, 0)
        acc = np.zeros(a.shape[1:], dtype=np.uint8)
        for row in a:
            acc = self.add_table[acc, row]
        return acc

    def dot(self, a, b, axis: int = -1) -> np.ndarray:
        """Inner product along ``axis`` (broadcasting)."""
        return self.sum(self.vmul(np.asarray(a, np.uint8), np.asarray(b, np.uint8)), axis=axis)

    def matmul(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=np.uint8)
        B = np.asarray(B, dtype=np.uint8)
        if A.shape[-1] != B.shape[0]:
            raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
        if self.w == 1:
            return ((A.astype(np.int64) @ B.astype(np.int64)) % self.p).astype(np.uint8)
        prods = self.mul_table[A[..., :, None], B]
        return self.sum(prods, axis=-2)

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.uint8)

    def format(self, a: int) -> str:
        if self.q <= 16:
            return format(a, "x")
        return format(a, "02x")


@lru_cache(maxsize=None)
def gf(q: int = 2) -> FieldSpec:
    """Return the cached field of order ``q`` with the library's fixed modulus."""
    for p in range(2, q + 1):
        if q % p == 0:
            break
    else:
        raise FieldError(f"invalid field order {q}")
    w, r = 0, q
    while r % p == 0:
        r //= p
        w += 1
    if r != 1:
        raise FieldError(f"{q} is not a prime power")
    return FieldSpec(p, w)


GF2 = gf(2)


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """Immutable dense matrix over a :class:`FieldSpec`."""

    field: FieldSpec
    data: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise DimensionError("matrix data must be two-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.field.q):
            raise FieldError(f"entries outside {self.field!r}")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], field: FieldSpec = GF2) -> "FieldMatrix":
        return cls(field, np.array([list(r) for r in rows], dtype=np.int64))

    @classmethod
    def identity(cls, n: int, field: FieldSpec = GF2) -> "FieldMatrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, r: int, c: int, field: FieldSpec = GF2) -> "FieldMatrix":
        return cls(field, np.zeros((r, c), dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix(self.field, self.data.T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.field.q, self.data.shape, self.data.tobytes()))

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return FieldMatrix(self.field, self.field.matmul(self.data, other.data))

    def __getitem__(self, idx):
        return self.data[idx]

    def column(self, j: int) -> np.ndarray:
        return self.data[:, j]

    def hstack(self, other: "FieldMatrix") -> "FieldMatrix":
        return FieldMatrix(self.field, np.hstack([self.data, other.data]))

    def delete_columns(self, cols: Iterable[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, np.delete(self.data, list(cols), axis=1))

    def delete_rows(self, rows: Iterable[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, np.delete(self.data, list(rows), axis=0))

    def packed_columns(self) -> list[int]:
        """GF(2) only: each column as an int, bit ``r`` = entry in row ``r``."""
        if self.field.q != 2:
            raise FieldError("bit packing is defined for GF(2) only")
        weights = 1 << np.arange(self.rows, dtype=object)
        return [int(np.dot(self.data[:, j].astype(object), weights)) for j in range(self.cols)]

    def packed_rows(self) -> np.ndarray:
        """GF(2) only: rows packed 8 columns per byte (``np.packbits``)."""
        if self.field.q != 2:
            raise FieldError("bit packing is defined for GF(2) only")
        return np.packbits(self.data, axis=1)

    def rank(self) -> int:
        return rank(self)

    def to_text(self) -> str:
        return matrix_to_text(self)

    def __str__(self) -> str:
        return "\n".join(" ".join(self.field.format(int(v)) for v in row) for row in self.data)


def as_matrix(M, field: FieldSpec = GF2) -> FieldMatrix:
    if isinstance(M, FieldMatrix):
        return M
    return FieldMatrix(field, np.asarray(M))


def encode(u, G: FieldMatrix) -> np.ndarray:
    """Codeword ``c = u G``; ``u`` may also be a stack of messages (rows)."""
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1] != G.rows:
        raise DimensionError(f"message length {u.shape[-1]} != {G.rows} rows of G")
    if u.size and (u.min() < 0 or u.max() >= G.field.q):
        raise FieldError("message entries outside the field")
    return G.field.matmul(u.astype(np.uint8), G.data)


RowOp = tuple


def rref(M: FieldMatrix) -> tuple[FieldMatrix, list[int], list[RowOp]]:
    """Reduced row-echelon form.

    Returns:
        ``(R, pivots, ops)`` where ``ops`` is the list of elementary row
        operations (``("swap", a, b)``, ``("scale", r, c)``,
        ``("add", target, source, c)`` meaning ``row_t += c * row_s``) that
        turns ``M`` into ``R`` when replayed with :func:`replay_row_ops`.
    """
    F = M.field
    R = M.data.copy()
    nrows, ncols = R.shape
    pivots: list[int] = []
    ops: list[RowOp] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
            ops.append(("swap", r, piv))
        lead = int(R[r, c])
        if lead != 1:
            inv = F.inv(lead)
            R[r] = F.vmul(inv, R[r])
            ops.append(("scale", r, inv))
        for t in range(nrows):
            if t != r and R[t, c]:
                coef = F.neg(int(R[t, c]))
                R[t] = F.vadd(R[t], F.vmul(coef, R[r]))
                ops.append(("add", t, r, coef))
        pivots.append(c)
        r += 1
    return FieldMatrix(F, R), pivots, ops


def replay_row_ops(M: FieldMatrix, ops: Sequence[RowOp]) -> FieldMatrix:
    F = M.field
    R = M.data.copy()
    for op in ops:
        if op[0] == "swap":
            _, a, b = op
            R[[a, b]] = R[[b, a]]
        elif op[0] == "scale":
            _, a, c = op
            R[a] = F.vmul(c, R[a])
        elif op[0] == "add":
            _, t, s, c = op
            R[t] = F.vadd(R[t], F.vmul(c, R[s]))
        else:
            raise ValueError(f"unknown row op {op!r}")
    return FieldMatrix(F, R)


def rank(M: FieldMatrix) -> int:
    return len(rref(M)[1])


def nullspace(M: FieldMatrix) -> FieldMatrix:
    """Basis (as rows) of ``{v : M v^T = 0}``."""
    F = M.field
    R, pivots, _ = rref(M)
    free = [c for c in range(M.cols) if c not in set(pivots)]
    basis = np.zeros((len(free), M.cols), dtype=np.uint8)
    for b, f in enumerate(free):
        basis[b, f] = 1
        for r, pc in enumerate(pivots):
            basis[b, pc] = F.neg(int(R.data[r, f]))
    return FieldMatrix(F, basis)


def dual(G: FieldMatrix) -> FieldMatrix:
    """Parity-check matrix ``H`` ((m - s) x m) with ``G H^T = 0``."""
    if rank(G) != G.rows:
        raise RankError("dual() requires a full-rank generator matrix")
    return nullspace(G)


def same_row_space(A: FieldMatrix, B: FieldMatrix) -> bool:
    ra, rb = rank(A), rank(B)
    if ra != rb:
        return False
    return rank(FieldMatrix(A.field, np.vstack([A.data, B.data]))) == ra


def solve_left(M: FieldMatrix, target) -> np.ndarray | None:
    """Some ``x`` with ``M x^T = target`` (column combination), or ``None``."""
    F = M.field
    aug = FieldMatrix(F, np.hstack([M.data, np.asarray(target, dtype=np.int64).reshape(-1, 1)]))
    R, pivots, _ = rref(aug)
    if pivots and pivots[-1] == M.cols:
        return None
    x = np.zeros(M.cols, dtype=np.uint8)
    for r, pc in enumerate(pivots):
        x[pc] = R.data[r, -1]
    return x


def all_messages(field: FieldSpec, s: int) -> np.ndarray:
    """Every vector of ``field^s`` as rows, in lexicographic order."""
    q = field.q
    idx = np.arange(q**s, dtype=np.int64)
    out = np.empty((q**s, s), dtype=np.uint8)
    for pos in range(s - 1, -1, -1):
        out[:, pos] = idx % q
        idx //= q
    return out


def min_distance(G: FieldMatrix, budget: int = 2**24) -> int:
    """Minimum Hamming weight over all nonzero codewords.

    Small dimensions enumerate the whole code.  Larger ones search by
    message weight on an information set (see :func:`min_distance_by_weight`),
    which is exact and fast whenever the distance is small.
    """
    s = G.rows
    F = G.field
    if rank(G) != s:
        raise RankError("min_distance() requires a full-rank generator matrix")
    if s > MIN_DISTANCE_GUARD or F.q**s > 2**MIN_DISTANCE_GUARD:
        return min_distance_by_weight(G, budget)
    if F.q == 2:
        return _gf2_min_distance(G)
    best = G.cols
    msgs = all_messages(F, s)[1:]
    for start in range(0, len(msgs), 1 << 14):
        cw = F.matmul(msgs[start:start + (1 << 14)], G.data)
        best = min(best, int(np.count_nonzero(cw, axis=1).min()))
    return best


def min_distance_by_weight(G: FieldMatrix, budget: int = 2**24) -> int:
    """Exact minimum distance by increasing message weight.

    After row reduction the pivot columns carry the message itself, so a
    codeword from a weight-``w`` message weighs at least ``w``.  Messages of
    weight 1, 2, ... are enumerated (first nonzero entry fixed to 1) until
    ``w`` reaches the lightest codeword seen.  Raises ``DimensionError`` if
    more than ``budget`` messages would be needed.
    """
    F = G.field
    R, pivots, _ = rref(G)
    if len(pivots) != G.rows:
        raise RankError("min_distance() requires a full-rank generator matrix")
    rows = R.data[: len(pivots)]
    s, m = rows.shape
    best = m
    spent = 0
    w = 1
    while w < best and w <= s:
        spent += math.comb(s, w) * (F.q - 1) ** (w - 1)
        if spent > budget:
            raise DimensionError(f"weight search needs more than {budget} messages")
        supports = np.array(list(itertools.combinations(range(s), w)), dtype=np.int64)
        for coefs in itertools.product(range(1, F.q), repeat=w - 1):
            c = np.array((1,) + coefs, dtype=np.uint8)
            for start in range(0, len(supports), 1 << 14):
                picked = rows[supports[start:start + (1 << 14)]]  # (C, w, m)
                if F.q == 2:
                    cw = np.bitwise_xor.reduce(picked, axis=1)
                else:
                    cw = F.sum(F.vmul(c[None, :, None], picked), axis=1)
                best = min(best, int(np.count_nonzero(cw, axis=1).min()))
        w += 1
    return best


def _gf2_min_distance(G: FieldMatrix) -> int:
    # Meet in the middle: span of the low rows x span of the high rows, packed.
    s = G.rows
    packed = G.packed_rows()
    lo = min(s, 12)

    def span(rows: np.ndarray) -> np.ndarray:
        out = np.zeros((1, packed.shape[1]), dtype=np.uint8)
        for row in rows:
            out = np.vstack([out, out ^ row])
        return out

    low = span(packed[:lo])
    high = span(packed[lo:])
    best = G.cols
    for h_idx, h in enumerate(high):
        w = np.bitwise_count(low ^ h).sum(axis=1, dtype=np.int64)
        if h_idx == 0:
            w = w[1:]
        if w.size:
            best = min(best, int(w.min()))
    return best


def hamming_weight(v) -> int:
    return int(np.count_nonzero(v))


def matrix_to_text(M: FieldMatrix) -> str:
    """``"q r c"`` header, then one line per row; hex digits when ``q > 10``."""
    lines = [f"{M.field.q} {M.rows} {M.cols}"]
    for row in M.data:
        if M.field.q > 10:
            lines.append(" ".join(M.field.format(int(v)) for v in row))
        else:
            lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> FieldMatrix:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 3:
        raise ValueError("matrix text must start with 'q r c'")
    q, r, c = (int(x) for x in lines[0])
    body = lines[1:]
    if len(body) != r or any(len(row) != c for row in body):
        raise DimensionError(f"expected {r} rows of {c} entries")
    base = 16 if q > 10 else 10
    return FieldMatrix(gf(q), np.array([[int(x, base) for x in row] for row in body], dtype=np.int64).reshape(r, c))
