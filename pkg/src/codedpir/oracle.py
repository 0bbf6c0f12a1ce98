"""Brute-force oracle for the largest k a generator matrix supports.

Only minimal recovery sets matter for a maximum packing: any set summing
to ``e_i`` contains a minimal one, and swapping it in keeps disjointness.
Minimal sets are exactly the linearly independent column sets that
combine to ``e_i`` (a dependency inside a set could be cancelled out).

Over GF(2) all subsets summing to ``e_i`` form a coset of the null space of
``G``, so when that null space is small we list the coset and keep its
inclusion-minimal members.  Otherwise (few rows, many columns) a depth-first
walk over independent column sets is cheaper.
"""

from __future__ import annotations

import itertools

import numpy as np

from .gf import DimensionError, FieldMatrix, nullspace, rank, solve_left
from .packing import max_set_packing
from .pircode import PirCode, RecoverySet

GF2_COLUMN_GUARD = 24
GFQ_COLUMN_GUARD = 12
COSET_ENUM_LIMIT = 16  # list the coset when the null space has dim <= this


def _mask_to_cols(mask: int) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def _inclusion_minimal(masks: np.ndarray) -> list[int]:
    masks = np.unique(masks[masks != 0])
    weights = np.bitwise_count(masks)
    masks = masks[np.lexsort((masks, weights))]
    keep = []
    while masks.size:
        x = masks[0]
        keep.append(int(x))
        masks = masks[(masks & x) != x]
    return keep


def _gf2_coset_sets(G: FieldMatrix, target: np.ndarray) -> list[int]:
    x0 = solve_left(G, target)
    if x0 is None:
        return []
    weights = 1 << np.arange(G.cols, dtype=np.uint64)
    pack = lambda v: np.uint64(int(np.dot(v.astype(np.uint64), weights)))
    coset = np.array([pack(x0)], dtype=np.uint64)
    for b in nullspace(G).data:
        coset = np.concatenate([coset, coset ^ pack(b)])
    return _inclusion_minimal(coset)


def _gf2_dfs_sets(G: FieldMatrix, target_vec: np.ndarray) -> list[int]:
    cols = G.packed_columns()
    m = len(cols)
    target = sum(int(b) << r for r, b in enumerate(target_vec))

    def reduce(v: int, basis: dict[int, int]) -> int:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                return v
            v ^= basis[top]
        return 0

    # suffix_basis[j] spans columns j..m-1 (for the reachability prune).
    suffix_basis: list[dict[int, int]] = [dict() for _ in range(m + 1)]
    for j in range(m - 1, -1, -1):
        b = dict(suffix_basis[j + 1])
        r = reduce(cols[j], b)
        if r:
            b[r.bit_length() - 1] = r
        suffix_basis[j] = b

    out: list[int] = []

    def dfs(start: int, acc: int, basis: dict[int, int], chosen: int):
        need = acc ^ target
        if need == 0:
            out.append(chosen)
            return
        if reduce(need, suffix_basis[start]):
            return
        for j in range(start, m):
            r = reduce(cols[j], basis)
            if not r:
                continue  # dependent on the chosen columns: never minimal
            nb = dict(basis)
            nb[r.bit_length() - 1] = r
            dfs(j + 1, acc ^ cols[j], nb, chosen | (1 << j))

    dfs(0, 0, {}, 0)
    return out


def _gfq_sets(G: FieldMatrix, target: np.ndarray) -> list[tuple[int, RecoverySet]]:
    F = G.field
    s, m = G.shape
    out = []
    for size in range(1, min(s, m) + 1):
        for cols in itertools.combinations(range(m), size):
            sub = FieldMatrix(F, G.data[:, list(cols)])
            if rank(sub) != size:
                continue
            x = solve_left(sub, target)
            if x is None or not np.all(x):
                continue
            R = RecoverySet.of(cols, [int(a) for a in x])
            out.append((R.mask, R))
    return out


def minimal_recovery_sets(G: FieldMatrix, i: int | np.ndarray) -> list[RecoverySet]:
    """All minimal recovery sets of ``e_i`` (supports with coefficients).

    ``i`` may also be an arbitrary nonzero target vector.
    """
    if isinstance(i, (int, np.integer)):
        if not 0 <= i < G.rows:
            raise IndexError(f"message index {i} out of range")
        target = np.zeros(G.rows, dtype=np.uint8)
        target[i] = 1
    else:
        target = np.asarray(i, dtype=np.uint8)
    if G.field.q == 2:
        if G.cols > GF2_COLUMN_GUARD:
            raise DimensionError(f"oracle limited to m <= {GF2_COLUMN_GUARD} over GF(2)")
        if G.cols - rank(G) <= COSET_ENUM_LIMIT:
            masks = _gf2_coset_sets(G, target)
        else:
            masks = _gf2_dfs_sets(G, target)
        return [RecoverySet.of(_mask_to_cols(x)) for x in sorted(masks)]
    if G.cols > GFQ_COLUMN_GUARD:
        raise DimensionError(f"oracle limited to m <= {GFQ_COLUMN_GUARD} over GF(q>2)")
    return [R for _, R in sorted(_gfq_sets(G, target), key=lambda t: t[0])]


def max_pir_k(G: FieldMatrix, i: int | np.ndarray, limit: int | None = None) -> tuple[int, list[RecoverySet]]:
    """Largest number of disjoint recovery sets for ``e_i``, with witnesses.

    Args:
        G: Generator matrix (GF(2): m <= 24; larger fields: m <= 12).
        i: Message position (0-indexed).
        limit: Optional early stop once this many sets are found.
    """
    sets = minimal_recovery_sets(G, i)
    chosen = max_set_packing([R.mask for R in sets], limit=limit)
    wit = [sets[j] for j in chosen]
    return len(wit), wit


def oracle_certify(G: FieldMatrix, provenance: str = "oracle") -> PirCode:
    """Certify ``G`` at the largest k that holds for every position."""
    per = [max_pir_k(G, i)[1] for i in range(G.rows)]
    k = min(len(w) for w in per)
    return PirCode(G, k, [w[:k] for w in per], provenance)


def best_basis_certify(G: FieldMatrix, provenance: str = "oracle-basis") -> PirCode:
    """Best k over all choices of message basis for the code spanned by ``G``.

    Property A_k depends on the generator only through which ``s`` targets
    are asked for.  For every nonzero target ``v`` compute the largest
    number of disjoint sets summing to ``v``; a greedy pass in decreasing
    order of that number then picks ``s`` independent targets maximizing the
    minimum (matroid bottleneck).  Re-expressing ``G`` in that basis gives
    the generator.  GF(2), ``s <= 12``.
    """
    from .cosets import CosetFamily, bk_to_generator

    if G.field.q != 2 or G.rows > 12:
        raise DimensionError("basis search needs GF(2) and s <= 12")
    s = G.rows
    scored = []
    for v in range(1, 1 << s):
        vec = np.array([(v >> r) & 1 for r in range(s)], dtype=np.uint8)
        k, wit = max_pir_k(G, vec)
        scored.append((-k, v, vec, wit))
    scored.sort(key=lambda t: (t[0], t[1]))
    chosen = []
    basis = FieldMatrix.zeros(0, s)
    for negk, v, vec, wit in scored:
        cand = FieldMatrix(G.field, np.vstack([basis.data, vec]))
        if rank(cand) == cand.rows:
            basis = cand
            chosen.append((vec, wit))
        if len(chosen) == s:
            break
    k = min(len(w) for _, w in chosen)
    fam = CosetFamily(G, tuple(tuple(int(x) for x in vec) for vec, _ in chosen), tuple(tuple(w[:k]) for _, w in chosen))
    return bk_to_generator(fam, provenance)
