"""Ways to build new PIR codes from old ones, with certificates carried over.

All of these mirror simple inequalities on A(s, k):

* ``concat``: A(s, k1 + k2) <= A(s, k1) + A(s, k2)
* ``direct_sum``: A(s1 + s2, k) <= A(s1, k) + A(s2, k)
* ``puncture``: A(s, k - 1) <= A(s, k) - 1
* ``shrink``: A(s - 1, k) <= A(s, k) - 1
* ``even_extend``: A(s, k + 1) <= A(s, k) + 1 for odd k
"""

from __future__ import annotations

import numpy as np

from .cosets import CosetFamily, bk_to_generator, puncture_cosets
from .gf import GF2, FieldMatrix
from .pircode import PirCode, RecoverySet


class ShapeError(ValueError):
    """Operands of a combinator have incompatible parameters."""


def concat(c1: PirCode, c2: PirCode) -> PirCode:
    """Side-by-side generators: same s, servers add up."""
    if c1.s != c2.s or c1.field != c2.field:
        raise ShapeError("concat needs the same s and field")
    G = FieldMatrix(c1.field, np.hstack([c1.G.data, c2.G.data]))
    ws = [list(a) + [R.shifted(c1.m) for R in b] for a, b in zip(c1.witnesses, c2.witnesses)]
    return PirCode(G, c1.k + c2.k, ws, f"concat({c1.provenance},{c2.provenance})")


def direct_sum(c1: PirCode, c2: PirCode) -> PirCode:
    """Block-diagonal generator; certified at ``min(k1, k2)``."""
    if c1.field != c2.field:
        raise ShapeError("direct_sum needs the same field")
    k = min(c1.k, c2.k)
    G = np.zeros((c1.s + c2.s, c1.m + c2.m), dtype=np.int64)
    G[: c1.s, : c1.m] = c1.G.data
    G[c1.s :, c1.m :] = c2.G.data
    ws = [list(w[:k]) for w in c1.witnesses] + [[R.shifted(c1.m) for R in w[:k]] for w in c2.witnesses]
    return PirCode(FieldMatrix(c1.field, G), k, ws, f"sum({c1.provenance},{c2.provenance})")


def puncture(c: PirCode, position: int) -> PirCode:
    """Delete one column; every position loses at most one recovery set."""
    if not 0 <= position < c.m:
        raise IndexError("position out of range")
    if c.m - 1 < c.s:
        raise ShapeError("cannot puncture below m = s")
    hit = any(position in R.columns for ws in c.witnesses for R in ws)
    k = c.k - 1 if hit else c.k
    if k < 1:
        raise ShapeError("puncturing would leave no recovery set")
    relabel = [j - (j > position) for j in range(c.m)]
    ws = []
    for sets in c.witnesses:
        keep = [R for R in sets if position not in R.columns][:k]
        ws.append([R.relabeled(relabel) for R in keep])
    return PirCode(c.G.delete_columns([position]), k, ws, f"punct({c.provenance})")


def even_extend(c: PirCode) -> PirCode:
    """Odd k to k + 1 by making the column sum zero.

    If all columns already sum to zero nothing is appended.  Either way the
    columns outside the k witnesses of ``e_i`` sum to ``e_i`` and form the
    extra recovery set.
    """
    if c.field.q != 2:
        raise ShapeError("even_extend is defined over GF(2)")
    if c.k % 2 == 0:
        raise ShapeError("even_extend needs odd k")
    total = np.bitwise_xor.reduce(c.G.data, axis=1)
    G = c.G
    if total.any():
        G = G.hstack(FieldMatrix(GF2, total.reshape(-1, 1)))
    m = G.cols
    ws = []
    for sets in c.witnesses:
        used = 0
        for R in sets:
            used |= R.mask
        rest = [j for j in range(m) if not used >> j & 1]
        ws.append(list(sets) + [RecoverySet.of(rest)])
    return PirCode(G, c.k + 1, ws, f"ext({c.provenance})")


def drop_zero_columns(c: PirCode) -> PirCode:
    """Remove all-zero columns (never needed by any witness) from ``c``."""
    zero = [j for j in range(c.m) if not c.G.data[:, j].any()]
    if not zero:
        return c
    keep = [j for j in range(c.m) if j not in set(zero)]
    relabel = {j: t for t, j in enumerate(keep)}
    ws = []
    for sets in c.witnesses:
        row = []
        for R in sets:
            members = [(relabel[j], a) for j, a in R.members if j in relabel]
            row.append(RecoverySet(tuple(sorted(members))))
        ws.append(row)
    return PirCode(FieldMatrix(c.field, c.G.data[:, keep]), c.k, ws, c.provenance)


def shrink(c: PirCode, position: int | None = None) -> PirCode:
    """``[m, s]`` k-server code to an ``[m - 1, s - 1]`` k-server code.

    Works on the coset view: puncture the code whose parity-check matrix is
    ``G`` and keep ``s - 1`` cosets with independent syndromes.  Defaults to
    the last nonzero column.
    """
    if c.field.q != 2:
        raise ShapeError("shrink is defined over GF(2)")
    if c.s < 2:
        raise ShapeError("shrink needs s >= 2")
    c = drop_zero_columns(c)
    if position is None:
        position = c.m - 1
    fam = puncture_cosets(CosetFamily.from_pir_code(c), position)
    return bk_to_generator(fam, f"shrink({c.provenance})")


def delete_message(c: PirCode, i: int) -> PirCode:
    """Drop message position ``i`` (row of G); k unchanged, m unchanged."""
    if c.s < 2:
        raise ShapeError("need s >= 2")
    return PirCode(c.G.delete_rows([i]), c.k, [w for t, w in enumerate(c.witnesses) if t != i], f"drop({c.provenance})")


def _nonzero_vectors(s: int) -> list[int]:
    units = [1 << r for r in range(s)]
    return units + [v for v in range(1, 1 << s) if v & (v - 1)]


def balanced_multiplicity_code(s: int, k: int) -> PirCode:
    """Every nonzero vector of GF(2)^s as a column, each ``k / 2^(s-1)`` times.

    For ``e_i`` the recovery sets are ``{e_i}`` and the pairs ``{v, v + e_i}``
    (``v_i = 0``), taken once per copy.  Unit columns come first, so the code
    is systematic.
    """
    if s < 1 or k < 1:
        raise ShapeError("need s, k >= 1")
    half = 1 << (s - 1)
    if k % half:
        raise ShapeError(f"k={k} is not divisible by 2^(s-1)={half}")
    mu = k // half
    vecs = _nonzero_vectors(s)
    cols = [v for _ in range(mu) for v in vecs]
    G = np.array([[(v >> r) & 1 for v in cols] for r in range(s)], dtype=np.int64)
    n = len(vecs)
    pos = {v: t for t, v in enumerate(vecs)}
    ws = []
    for i in range(s):
        e = 1 << i
        sets = []
        for copy in range(mu):
            off = copy * n
            sets.append(RecoverySet.of([off + pos[e]]))
            for v in vecs:
                if v & e == 0:
                    sets.append(RecoverySet.of(sorted([off + pos[v], off + pos[v ^ e]])))
        ws.append(sets)
    return PirCode(FieldMatrix(GF2, G), k, ws, f"balanced({s},{k})")


def simplex_minus_subspace(s: int, d: int) -> PirCode:
    """All nonzero columns of GF(2)^s except a ``d``-dimensional subspace W.

    W is spanned by ``e_j + e_{j+1}`` for ``j < d``, so it holds only
    even-weight vectors and no unit vector.  For ``e_i`` the recovery sets
    are ``{e_i}``, every pair ``{v, v + e_i}`` missing W, and (when
    ``d >= 2``) the translate ``{w + e_i : w in W, w != 0}``, whose sum is
    ``e_i`` because the nonzero vectors of W sum to zero.  That gives
    ``k = 2^(s-1) - 2^d + 1 + [d >= 2]`` on ``m = 2^s - 2^d`` columns.
    """
    if not 1 <= d <= s - 1:
        raise ShapeError("need 1 <= d <= s - 1")
    span = {0}
    for j in range(d):
        b = (1 << j) | (1 << (j + 1))
        span |= {w ^ b for w in span}
    cols = [v for v in _nonzero_vectors(s) if v not in span]
    pos = {v: t for t, v in enumerate(cols)}
    G = np.array([[(v >> r) & 1 for v in cols] for r in range(s)], dtype=np.int64)
    ws = []
    for i in range(s):
        e = 1 << i
        sets = [RecoverySet.of([pos[e]])]
        for v in range(1, 1 << s):
            if v & e == 0 and v in pos and v ^ e in pos:
                sets.append(RecoverySet.of(sorted([pos[v], pos[v ^ e]])))
        if d >= 2:
            sets.append(RecoverySet.of(sorted(pos[w ^ e] for w in span if w)))
        ws.append(sets)
    k = min(len(w) for w in ws)
    return PirCode(FieldMatrix(GF2, G), k, ws, f"anticode({s},{d})")
