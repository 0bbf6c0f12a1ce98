"""Steiner systems S(2, l, n): triple systems, projective and affine planes."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from math import comb

from .gf import FieldError, gf


class DesignError(ValueError):
    """Parameters admit no construction here, or the design is invalid."""


@dataclass(frozen=True)
class SteinerSystem:
    """Blocks of size ``l`` on points ``0..n-1``; every ``t``-set in one block."""

    t: int
    l: int
    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(tuple(sorted(b)) for b in self.blocks)))

    @property
    def replication(self) -> int:
        """Number of blocks through each point."""
        return comb(self.n - 1, self.t - 1) // comb(self.l - 1, self.t - 1)

    def problems(self) -> list[str]:
        out = []
        if any(len(b) != self.l for b in self.blocks):
            out.append("block of the wrong size")
        if any(not 0 <= p < self.n for b in self.blocks for p in b):
            out.append("point out of range")
        if comb(self.n, self.t) % comb(self.l, self.t):
            out.append("block count not integral")
        elif len(self.blocks) != comb(self.n, self.t) // comb(self.l, self.t):
            out.append(f"{len(self.blocks)} blocks, expected {comb(self.n, self.t) // comb(self.l, self.t)}")
        cover = Counter(c for b in self.blocks for c in itertools.combinations(b, self.t))
        if len(cover) != comb(self.n, self.t) or any(v != 1 for v in cover.values()):
            out.append(f"some {self.t}-subset is not covered exactly once")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def dual_blocks(self) -> tuple[tuple[int, ...], ...]:
        """For each point, the indices of the blocks that contain it."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in enumerate(self.blocks):
            for p in b:
                inc[p].append(a)
        return tuple(tuple(x) for x in inc)

    def to_text(self) -> str:
        lines = [f"{self.t} {self.l} {self.n}"] + [" ".join(map(str, b)) for b in self.blocks]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SteinerSystem":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        t, l, n = (int(x) for x in rows[0])
        return cls(t, l, n, tuple(tuple(int(x) for x in r) for r in rows[1:]))


def _checked(S: SteinerSystem) -> SteinerSystem:
    problems = S.problems()
    if problems:
        raise DesignError("; ".join(problems))
    return S


def steiner_triple(n: int) -> SteinerSystem:
    """S(2, 3, n): Bose for n = 3 (mod 6), Skolem for n = 1 (mod 6).

    Points are pairs ``(x, i)`` with ``i`` in Z_3, numbered ``i * w + x`` where
    ``w`` is the quasigroup order; in the Skolem case the extra point is
    ``n - 1``.
    """
    if n < 7 or n % 6 not in (1, 3):
        raise DesignError(f"no triple system construction for n={n} (need n = 1, 3 mod 6, n >= 7)")
    blocks = []
    if n % 6 == 3:
        v = (n - 3) // 6
        w = 2 * v + 1

        def op(x, y):
            return ((x + y) * (v + 1)) % w

        pt = lambda x, i: (i % 3) * w + x
        for x in range(w):
            blocks.append((pt(x, 0), pt(x, 1), pt(x, 2)))
    else:
        v = (n - 1) // 6
        w = 2 * v
        inf = n - 1

        def op(x, y):
            z = (x + y) % w
            return z // 2 + v * (z % 2)

        pt = lambda x, i: (i % 3) * w + x
        for x in range(v):
            blocks.append((pt(x, 0), pt(x, 1), pt(x, 2)))
            for i in range(3):
                blocks.append((inf, pt(x + v, i), pt(x, i + 1)))
    for i in range(3):
        for x, y in itertools.combinations(range(w), 2):
            blocks.append((pt(x, i), pt(y, i), pt(op(x, y), i + 1)))
    return _checked(SteinerSystem(2, 3, n, tuple(blocks)))


def _field(q: int):
    try:
        return gf(q)
    except FieldError as exc:
        raise DesignError(f"order {q} is not a prime power") from exc


def projective_plane(q: int) -> SteinerSystem:
    """Lines of PG(2, q) as an S(2, q+1, q^2+q+1); q a prime power <= 256."""
    F = _field(q)
    points = []
    for v in itertools.product(range(q), repeat=3):
        nz = [a for a in v if a]
        if nz and nz[0] == 1:
            points.append(v)
    index = {p: j for j, p in enumerate(points)}
    blocks = []
    for L in points:
        line = []
        for p in points:
            acc = 0
            for a, b in zip(p, L):
                acc = F.add(acc, F.mul(a, b))
            if acc == 0:
                line.append(index[p])
        blocks.append(tuple(line))
    return _checked(SteinerSystem(2, q + 1, len(points), tuple(blocks)))


def affine_plane(q: int) -> SteinerSystem:
    """Lines of AG(2, q) as an S(2, q, q^2); point ``(x, y)`` is ``x * q + y``."""
    F = _field(q)
    blocks = []
    for a in range(q):
        for b in range(q):
            blocks.append(tuple(x * q + F.add(F.mul(a, x), b) for x in range(q)))
    for c in range(q):
        blocks.append(tuple(c * q + y for y in range(q)))
    return _checked(SteinerSystem(2, q, q * q, tuple(blocks)))
