"""Exact maximum set packing by branch and bound.

Sets are int bit masks.  Small instances only: the search is exponential
in the worst case, but the recovery-set families met in this package
(m <= 24 columns) resolve in milliseconds.
"""

from __future__ import annotations

from typing import Sequence


def greedy_packing(sets: Sequence[int]) -> list[int]:
    """Smallest-first greedy packing; returns indices into ``sets``."""
    order = sorted(range(len(sets)), key=lambda j: (sets[j].bit_count(), j))
    used, out = 0, []
    for j in order:
        if sets[j] and not sets[j] & used:
            used |= sets[j]
            out.append(j)
    return out


def max_set_packing(sets: Sequence[int], limit: int | None = None) -> list[int]:
    """Maximum number of pairwise-disjoint sets.

    Args:
        sets: Candidate sets as bit masks. Empty masks are ignored.
        limit: Stop as soon as a packing of this size is found.

    Returns:
        Indices of a maximum packing, sorted.
    """
    # Drop duplicates and empties; keep the first index for each mask.
    first: dict[int, int] = {}
    for j, s in enumerate(sets):
        if s and s not in first:
            first[s] = j
    masks = sorted(first, key=lambda s: (s.bit_count(), s))
    best = [first[masks[j]] for j in greedy_packing(masks)]
    if limit is not None and len(best) >= limit:
        return sorted(best[:limit])

    best_len = len(best)
    chosen: list[int] = []
    found: list[int] = []

    def bound(avail: list[int]) -> int:
        # avail is sorted by size: count how many of the smallest sets fit
        # into the union before running out of elements.
        union = 0
        for s in avail:
            union |= s
        room = union.bit_count()
        n = 0
        for s in avail:
            room -= s.bit_count()
            if room < 0:
                break
            n += 1
        return n

    def search(avail: list[int]) -> bool:
        nonlocal best_len, found
        if len(chosen) + bound(avail) <= best_len:
            return False
        if not avail:
            return False
        # Branch on the lowest element still coverable.
        union = 0
        for s in avail:
            union |= s
        e = union & -union
        with_e = [s for s in avail if s & e]
        without = [s for s in avail if not s & e]
        for s in with_e:
            chosen.append(s)
            rest = [t for t in without if not t & s]
            if len(chosen) > best_len:
                best_len = len(chosen)
                found = chosen[:]
                if limit is not None and best_len >= limit:
                    return True
            if search(rest):
                return True
            chosen.pop()
        return search(without)

    search(masks)
    if found:
        best = [first[s] for s in found]
    return sorted(best)
