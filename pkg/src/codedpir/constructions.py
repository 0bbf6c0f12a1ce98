"""Concrete PIR code families.

Every builder returns a certified :class:`PirCode`; the certificate is the
recovery-set structure the construction guarantees, re-checked on creation.
Columns and message positions are 0-indexed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .designs import SteinerSystem
from .gf import GF2, FieldMatrix, gf, nullspace, rref
from .packing import max_set_packing
from .pircode import PirCode, RecoverySet, identity_code, parity_code

CUBIC_CAP = 1 << 16


class ConstructionError(ValueError):
    """Parameters outside what a construction supports."""


@dataclass(frozen=True, eq=False)
class BipartiteIncidence:
    """Message bits (rows) versus parity bits (columns) of ``G = [I | M]``."""

    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=np.uint8)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def s(self) -> int:
        return self.M.shape[0]

    @property
    def r(self) -> int:
        return self.M.shape[1]

    @property
    def min_left_degree(self) -> int:
        return int(self.M.sum(axis=1).min()) if self.s else 0

    def four_cycle_free(self) -> bool:
        """No two rows share two columns."""
        overlap = self.M.astype(np.int64) @ self.M.T.astype(np.int64)
        np.fill_diagonal(overlap, 0)
        return bool((overlap <= 1).all())

    def girth_inequality(self) -> bool:
        """``r(r-1) >= sum_x deg(x)(deg(x)-1)``, implied by 4-cycle freeness."""
        deg = self.M.sum(axis=1).astype(np.int64)
        return self.r * (self.r - 1) >= int((deg * (deg - 1)).sum())


def systematic_code(M, k: int | None = None, provenance: str = "systematic") -> PirCode:
    """``G = [I | M]`` with the recovery sets of a 4-cycle-free incidence.

    For bit ``i`` the sets are ``{i}`` and, for each of its first ``k - 1``
    parities ``p``, the other bits of ``p`` together with ``p`` itself.
    """
    inc = M if isinstance(M, BipartiteIncidence) else BipartiteIncidence(M)
    if not inc.four_cycle_free():
        raise ConstructionError("incidence has a 4-cycle")
    kmax = inc.min_left_degree + 1
    k = kmax if k is None else k
    if k > kmax:
        raise ConstructionError(f"min degree {kmax - 1} supports k <= {kmax}")
    s, r = inc.s, inc.r
    G = np.hstack([np.eye(s, dtype=np.uint8), inc.M])
    ws = []
    for i in range(s):
        sets = [RecoverySet.of([i])]
        for p in np.nonzero(inc.M[i])[0][: k - 1]:
            others = [a for a in np.nonzero(inc.M[:, p])[0] if a != i]
            sets.append(RecoverySet.of(sorted(int(a) for a in others) + [s + int(p)]))
        ws.append(sets)
    return PirCode(FieldMatrix(GF2, G), k, ws, provenance)


def cubic_code(sigma: int, k: int, cap: int = CUBIC_CAP) -> PirCode:
    """The cube construction: ``s = sigma^(k-1)`` bits on a grid, one parity per axis line.

    Bit ``(i_1..i_{k-1})`` is row ``sum i_j sigma^(k-1-j)`` (lexicographic).
    Parity group ``xi`` holds the sums along axis ``xi``.
    """
    if sigma < 1 or k < 2:
        raise ConstructionError("need sigma >= 1 and k >= 2")
    d = k - 1
    s = sigma**d
    if s > cap:
        raise ConstructionError(f"sigma^(k-1) = {s} exceeds cap {cap}")
    lines = sigma ** (d - 1)
    m = s + d * lines
    cells = list(itertools.product(range(sigma), repeat=d))
    index = {c: t for t, c in enumerate(cells)}
    rest = list(itertools.product(range(sigma), repeat=d - 1))
    rest_index = {c: t for t, c in enumerate(rest)}
    G = np.zeros((s, m), dtype=np.uint8)
    G[:, :s] = np.eye(s, dtype=np.uint8)
    for c, t in index.items():
        for xi in range(d):
            key = c[:xi] + c[xi + 1 :]
            G[t, s + xi * lines + rest_index[key]] = 1
    ws = []
    for c, t in index.items():
        sets = [RecoverySet.of([t])]
        for xi in range(d):
            key = c[:xi] + c[xi + 1 :]
            line = [index[c[:xi] + (delta,) + c[xi + 1 :]] for delta in range(sigma) if delta != c[xi]]
            sets.append(RecoverySet.of(sorted(line) + [s + xi * lines + rest_index[key]]))
        ws.append(sets)
    return PirCode(FieldMatrix(GF2, G), k, ws, f"cubic({sigma},{k})")


def _cube_cells(s: int, k: int) -> tuple[int, list[tuple[int, ...]]]:
    sigma = 1
    while sigma ** (k - 1) < s:
        sigma += 1
    cells = list(itertools.islice(itertools.product(range(sigma), repeat=k - 1), s))
    return sigma, cells


def cubic_truncated_length(s: int, k: int) -> int:
    """Length of :func:`cubic_code_for` without building it."""
    _, cells = _cube_cells(s, k)
    lines = {(xi, c[:xi] + c[xi + 1 :]) for c in cells for xi in range(k - 1)}
    return s + len(lines)


def cubic_code_for(s: int, k: int) -> PirCode:
    """Cube construction for arbitrary ``s``.

    Uses the smallest ``sigma`` with ``sigma^(k-1) >= s`` and keeps the first
    ``s`` grid cells in lexicographic order; the missing cells count as
    zeros, so parities whose lines hold no kept cell are dropped.
    """
    if k < 2 or s < 1:
        raise ConstructionError("need s >= 1 and k >= 2")
    sigma, cells = _cube_cells(s, k)
    if len(cells) == sigma ** (k - 1):
        return cubic_code(sigma, k)
    index = {c: t for t, c in enumerate(cells)}
    line_ids: dict[tuple, int] = {}
    for c in cells:
        for xi in range(k - 1):
            line_ids.setdefault((xi, c[:xi] + c[xi + 1 :]), s + len(line_ids))
    m = s + len(line_ids)
    G = np.zeros((s, m), dtype=np.uint8)
    G[:, :s] = np.eye(s, dtype=np.uint8)
    ws = []
    for c, t in index.items():
        sets = [RecoverySet.of([t])]
        for xi in range(k - 1):
            p = line_ids[(xi, c[:xi] + c[xi + 1 :])]
            G[t, p] = 1
            line = [index[v] for v in (c[:xi] + (d,) + c[xi + 1 :] for d in range(sigma)) if v != c and v in index]
            sets.append(RecoverySet.of(sorted(line) + [p]))
        ws.append(sets)
    return PirCode(FieldMatrix(GF2, G), k, ws, f"cubic[{s}]({sigma},{k})")


def steiner_code(S: SteinerSystem, orientation: str = "column") -> PirCode:
    """Systematic code from a Steiner system with ``t = 2``.

    ``column``: points are message bits and blocks are parities, so
    ``k = replication + 1``.  ``row``: blocks are message bits and points are
    parities, so ``k = l + 1``.
    """
    if S.t != 2:
        raise ConstructionError("steiner_code needs t = 2")
    inc = np.zeros((S.n, len(S.blocks)), dtype=np.uint8)
    for a, b in enumerate(S.blocks):
        inc[list(b), a] = 1
    if orientation == "column":
        M = inc
    elif orientation == "row":
        M = inc.T
    else:
        raise ConstructionError(f"unknown orientation {orientation!r}")
    return systematic_code(M, provenance=f"steiner-{orientation}(S(2,{S.l},{S.n}))")


def lexicode_rows(r: int, w: int, d: int, limit: int | None = None) -> list[tuple[int, ...]]:
    """Greedy constant-weight code: scan weight-``w`` supports lexicographically.

    Args:
        r: Length.
        w: Weight.
        d: Minimum distance (two rows may share at most ``w - ceil(d/2)`` ones).
        limit: Stop after this many rows.
    """
    if r > 64:
        raise ValueError("lexicode search is limited to r <= 64")
    max_common = w - (d + 1) // 2
    n = comb(r, w)
    if n == 0 or w == 0:
        return []
    flat = itertools.chain.from_iterable(itertools.combinations(range(r), w))
    cands = np.fromiter(flat, dtype=np.uint64, count=n * w).reshape(n, w)
    masks = np.bitwise_or.reduce(np.uint64(1) << cands, axis=1)
    free = np.ones(n, dtype=bool)
    rows: list[tuple[int, ...]] = []
    pos = 0
    while limit is None or len(rows) < limit:
        nxt = np.flatnonzero(free[pos:])
        if nxt.size == 0:
            break
        pos += int(nxt[0])
        rows.append(tuple(int(a) for a in cands[pos]))
        free &= np.bitwise_count(masks & masks[pos]) <= max_common
        pos += 1
    return rows


def pair_packing_optimum(r: int, w: int) -> list[tuple[int, ...]]:
    """Largest family of ``w``-subsets of ``[r]`` meeting pairwise in <= 1 point (r <= 12)."""
    if r > 12:
        raise ConstructionError("exhaustive packing limited to r <= 12")
    pairs = {p: j for j, p in enumerate(itertools.combinations(range(r), 2))}
    cands = list(itertools.combinations(range(r), w))
    masks = []
    for c in cands:
        m = 0
        for p in itertools.combinations(c, 2):
            m |= 1 << pairs[p]
        masks.append(m)
    return [cands[j] for j in max_set_packing(masks)]


def _rows_to_incidence(rows, r: int) -> np.ndarray:
    M = np.zeros((len(rows), r), dtype=np.uint8)
    for t, row in enumerate(rows):
        M[t, list(row)] = 1
    return M


def constant_weight_code(r: int, k: int, optimal: bool = False) -> PirCode:
    """``G = [I | M]`` with rows of ``M`` of weight ``k - 1``, pairwise distance >= ``2k - 4``.

    Args:
        r: Number of parities (length of the constant-weight code).
        k: Target server count, ``r >= k - 1 >= 2``.
        optimal: Use the exhaustive maximum family instead of the greedy
            lexicode (``r <= 12`` only).
    """
    if not r >= k - 1 >= 2:
        raise ConstructionError("need r >= k - 1 >= 2")
    if optimal:
        rows = pair_packing_optimum(r, k - 1)
    else:
        rows = lexicode_rows(r, k - 1, 2 * k - 4)
    tag = "cw-opt" if optimal else "cw"
    return systematic_code(_rows_to_incidence(rows, r), k, f"{tag}({r},{k})")


# --- cyclic codes and one-step majority logic ------------------------------


def _poly_divmod(a: int, b: int) -> tuple[int, int]:
    q = 0
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        shift = a.bit_length() - 1 - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def cyclic_generator(g: int, n: int) -> FieldMatrix:
    """Rows ``x^j g(x)`` (coefficient of ``x^t`` in column ``t``); g as a bit mask."""
    _, rem = _poly_divmod((1 << n) | 1, g)
    if rem:
        raise ConstructionError(f"g = {g:#b} does not divide x^{n} - 1")
    deg = g.bit_length() - 1
    s = n - deg
    G = np.array([[(g << j) >> t & 1 for t in range(n)] for j in range(s)], dtype=np.uint8)
    return FieldMatrix(GF2, G)


def cyclic_orthogonal_search(g: int, n: int, i: int) -> tuple[int, list[tuple[int, ...]]]:
    """Largest family of dual codewords whose supports meet exactly at ``i``.

    Returns:
        ``(J, supports)`` where each support excludes ``i`` itself.  Exact (all
        ``2^(n-s)`` dual codewords are listed) for ``n - s <= 20``.
    """
    G = cyclic_generator(g, n)
    H = nullspace(G)
    if H.rows > 20:
        raise ConstructionError("dual too large for exhaustive search")
    weights = 1 << np.arange(n, dtype=np.int64)
    basis = (H.data.astype(np.int64) * weights).sum(axis=1)
    words = np.zeros(1, dtype=np.int64)
    for b in basis:
        words = np.concatenate([words, words ^ b])
    cands = sorted({int(w) & ~(1 << i) for w in words if w >> i & 1})
    chosen = max_set_packing([c for c in cands])
    out = [tuple(t for t in range(n) if cands[j] >> t & 1) for j in chosen]
    return len(out), sorted(out)


ML15_7_POLY = 0b111010001  # 1 + x^4 + x^6 + x^7 + x^8
ML15_7_ORTHOGONAL_14 = ((3, 11, 12), (1, 5, 13), (0, 2, 6), (7, 8, 10))


def majority_logic_15_7() -> PirCode:
    """The (15, 7) cyclic code as a 5-server code with a systematic generator.

    Coordinate 14 has four orthogonal dual checks; cyclic shifts move them to
    every coordinate, and the systematic positions 0..6 are the message bits.
    """
    n = 15
    G = rref(cyclic_generator(ML15_7_POLY, n))[0]
    ws = []
    for i in range(G.rows):
        shift = i - 14
        sets = [RecoverySet.of([i])]
        for sup in ML15_7_ORTHOGONAL_14:
            sets.append(RecoverySet.of(sorted((a + shift) % n for a in sup)))
        ws.append(sets)
    return PirCode(G, 5, ws, "ml15-7")


# --- small named codes ------------------------------------------------------

EXAMPLE2_G = (
    (1, 0, 0, 0, 1, 0, 0, 1),
    (0, 1, 0, 0, 1, 1, 0, 0),
    (0, 0, 1, 0, 0, 1, 1, 0),
    (0, 0, 0, 1, 0, 0, 1, 1),
)
EXAMPLE2_WITNESSES = (
    ((0,), (1, 4), (3, 7)),
    ((1,), (0, 4), (2, 5)),
    ((2,), (1, 5), (3, 6)),
    ((3,), (2, 6), (0, 7)),
)


def example2_code() -> PirCode:
    """The [8, 4, 3] code with parities x1+x2, x2+x3, x3+x4, x4+x1 (3-server)."""
    ws = [[RecoverySet.of(R) for R in sets] for sets in EXAMPLE2_WITNESSES]
    return PirCode(FieldMatrix.from_rows(EXAMPLE2_G), 3, ws, "example2")


def gf4_code() -> PirCode:
    """The [5, 2] code over GF(4): (x1, x2, x1+x2, x1+a x2, x1+a^2 x2), 3-server."""
    F = gf(4)
    a = F.primitive
    a2 = F.mul(a, a)
    G = FieldMatrix(F, np.array([[1, 0, 1, 1, 1], [0, 1, 1, a, a2]]))
    ws = [
        [RecoverySet.of([0]), RecoverySet.of([1, 2]), RecoverySet.of([3, 4], [a2, a])],
        [RecoverySet.of([1]), RecoverySet.of([0, 2]), RecoverySet.of([3, 4])],
    ]
    return PirCode(G, 3, ws, "gf4")


def fano_code() -> PirCode:
    from .designs import projective_plane

    return steiner_code(projective_plane(2), "column")


def build(family: str, **params) -> PirCode:
    """Dispatch by family name (used by the CLI)."""
    from . import designs
    from .combinators import balanced_multiplicity_code

    if family == "cubic":
        return cubic_code(int(params["sigma"]), int(params["k"]))
    if family in ("steiner-column", "steiner-row"):
        design = params.get("design", "sts")
        n = int(params["n"])
        if design == "sts":
            S = designs.steiner_triple(n)
        elif design == "pg":
            S = designs.projective_plane(n)
        elif design == "ag":
            S = designs.affine_plane(n)
        else:
            raise ConstructionError(f"unknown design {design!r}")
        return steiner_code(S, family.split("-")[1])
    if family == "constant-weight":
        return constant_weight_code(int(params["r"]), int(params["k"]))
    if family == "ml15-7":
        return majority_logic_15_7()
    if family == "balanced":
        return balanced_multiplicity_code(int(params["s"]), int(params["k"]))
    if family == "example2":
        return example2_code()
    if family == "parity":
        return parity_code(int(params["s"]))
    if family == "identity":
        return identity_code(int(params["s"]))
    if family == "anticode":
        from .combinators import simplex_minus_subspace

        return simplex_minus_subspace(int(params["s"]), int(params["d"]))
    if family == "gf4":
        return gf4_code()
    raise ConstructionError(f"unknown family {family!r}")


def expected_cubic_length(sigma: int, k: int) -> int:
    return sigma ** (k - 1) + (k - 1) * sigma ** (k - 2)


def steiner_block_count(n: int, l: int) -> int:
    return comb(n, 2) // comb(l, 2)
