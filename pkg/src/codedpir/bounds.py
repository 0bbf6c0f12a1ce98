"""Bounds on A(s, k), the shortest length of an s-row k-server PIR code.

Closed forms for each construction, the counting lower bound, and a
closure engine that seeds a grid of cells with every implemented
construction and then applies the combinator inequalities to a fixpoint.
Each cell keeps a :class:`Recipe`, a derivation tree that :func:`realize`
turns back into a verified :class:`PirCode`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb, isqrt
from typing import Iterator

from . import combinators as cb
from . import constructions as cons
from . import designs
from .pircode import PirCode, identity_code, parity_code, repetition_code
from .reference import table_value

# --- closed forms -----------------------------------------------------------


def counting_bound(s: int, k: int) -> Fraction:
    """The rational bound ``(2^s - 1) k / 2^(s-1)`` (binary codes)."""
    return Fraction((2**s - 1) * k, 2 ** (s - 1))


def _ceil(x: Fraction) -> int:
    return -(-x.numerator // x.denominator)


def lower_bound(s: int, k: int) -> int:
    """Best implemented lower bound on A(s, k) over GF(2).

    The maximum of the ceiling of :func:`counting_bound`, the Singleton-type
    bound ``s + k - 1`` (distance is at least k), and for odd k the
    even-neighbour bound ``lower_bound(s, k + 1) - 1`` (an odd-k code extends
    to k + 1 with one more column).
    """
    if s < 1 or k < 1:
        raise ValueError("need s, k >= 1")
    lb = max(_ceil(counting_bound(s, k)), s + k - 1)
    if k % 2 == 1:
        lb = max(lb, max(_ceil(counting_bound(s, k + 1)), s + k) - 1)
    return lb


def cubic_bound(s: int, k: int) -> int:
    """``s + (k-1) sigma^(k-2)`` with ``sigma`` the least integer, ``sigma^(k-1) >= s``."""
    if k < 2:
        raise ValueError("need k >= 2")
    sigma = 1
    while sigma ** (k - 1) < s:
        sigma += 1
    return s + (k - 1) * sigma ** (k - 2)


def steiner_bound(s: int, k: int) -> int | None:
    """``s + s(k-1)^2 / (s+k-2)`` when an S(2, (s-1)/(k-1)+1, s) would fit, else None.

    Only the arithmetic is checked; existence of the design is a separate
    question (see :mod:`codedpir.designs`).
    """
    if k < 3 or (s - 1) % (k - 1):
        return None
    num = s * (k - 1) ** 2
    if num % (s + k - 2):
        return None
    return s + num // (s + k - 2)


def steiner_row_bound(r: int, k: int) -> tuple[int, int] | None:
    """``(s, m)`` with ``s = r(r-1)/((k-1)(k-2))``, ``m = r + s`` from an S(2, k-1, r)."""
    if k < 4:
        return None
    num = r * (r - 1)
    den = (k - 1) * (k - 2)
    if num % den:
        return None
    s = num // den
    return s, r + s


@dataclass(frozen=True)
class DtiParams:
    m: int
    r: int
    s: int
    k: int


def dti_case1(theta: int, ell: int) -> DtiParams:
    """Length ``2^(2 theta ell) - 1``, redundancy ``(2^(theta+1) - 1)^ell - 1``, ``k = 2^ell + 2``."""
    m = 2 ** (2 * theta * ell) - 1
    r = (2 ** (theta + 1) - 1) ** ell - 1
    return DtiParams(m, r, m - r, 2**ell + 2)


def dti_case2(lam: int, ell: int) -> DtiParams:
    """Length ``2^(lam ell) - 1``, dimension ``(2^lam - 1)^ell - 1``, ``k = 2^ell``."""
    m = 2 ** (lam * ell) - 1
    s = (2**lam - 1) ** ell - 1
    return DtiParams(m, m - s, s, 2**ell)


def dti_bounds(a: int, ell: int, case: int = 1) -> DtiParams:
    return dti_case1(a, ell) if case == 1 else dti_case2(a, ell)


def constant_weight_bound(r: int, k: int, limit: int | None = None) -> tuple[int, int]:
    """``(s, m)`` achieved by the greedy constant-weight construction.

    With ``limit`` the count stops early, so ``s`` is then ``min(s, limit)``.
    """
    s = len(cons.lexicode_rows(r, k - 1, 2 * k - 4, limit))
    return s, s + r


def girth_bound_check(s: int, r: int, degree: int) -> bool:
    """Necessary condition ``r(r-1) >= s d(d-1)`` for a 4-cycle-free incidence."""
    return r * (r - 1) >= s * degree * (degree - 1)


def min_parities_girth(s: int, degree: int) -> int:
    """Smallest r passing :func:`girth_bound_check`."""
    need = s * degree * (degree - 1)
    r = max(1, isqrt(need))
    while r * (r - 1) < need:
        r += 1
    return r


# --- recipes ----------------------------------------------------------------


@dataclass(frozen=True)
class Recipe:
    """Derivation tree for a code with ``s`` rows, ``k`` servers, length ``m``.

    ``op`` is ``seed`` (``args = (family, params)``) or one of ``concat``,
    ``sum``, ``punct``, ``shrink``, ``ext`` (``args`` are child recipes).
    """

    op: str
    s: int
    k: int
    m: int
    args: tuple = ()

    @cached_property
    def size(self) -> int:
        if self.op == "seed":
            return 1
        return 1 + sum(c.size for c in self.args)

    @cached_property
    def text(self) -> str:
        if self.op == "seed":
            family, params = self.args
            return f"{family}({','.join(str(p) for p in params)})"
        return f"{self.op}({','.join(c.text for c in self.args)})"

    @property
    def key(self) -> tuple:
        return (self.m, self.size, self.text)


def _seed(family: str, params: tuple, s: int, k: int, m: int) -> Recipe:
    return Recipe("seed", s, k, m, (family, tuple(params)))


_SEED_BUILDERS = {
    "identity": lambda s: identity_code(s),
    "repetition": lambda k: repetition_code(k),
    "parity": lambda s: parity_code(s),
    "balanced": lambda s, k: cb.balanced_multiplicity_code(s, k),
    "cubic": lambda s, k: cons.cubic_code_for(s, k),
    "sts-column": lambda n: cons.steiner_code(designs.steiner_triple(n), "column"),
    "sts-row": lambda n: cons.steiner_code(designs.steiner_triple(n), "row"),
    "pg-column": lambda q: cons.steiner_code(designs.projective_plane(q), "column"),
    "pg-row": lambda q: cons.steiner_code(designs.projective_plane(q), "row"),
    "ag-column": lambda q: cons.steiner_code(designs.affine_plane(q), "column"),
    "ag-row": lambda q: cons.steiner_code(designs.affine_plane(q), "row"),
    "cw": lambda r, k: cons.constant_weight_code(r, k),
    "ml15-7": lambda: cons.majority_logic_15_7(),
    "anticode": lambda s, d: cb.simplex_minus_subspace(s, d),
}

STS_ORDERS = (7, 9, 13, 15, 19, 21, 25, 27, 31)
PLANE_ORDERS = (2, 3, 4, 5)
CW_ENUM_LIMIT = 60_000


def restrict_k(code: PirCode, k: int) -> PirCode:
    """Keep only the first ``k`` recovery sets of every position."""
    if k == code.k:
        return code
    if k > code.k:
        raise ValueError(f"cannot raise k from {code.k} to {k}")
    return PirCode(code.G, k, [w[:k] for w in code.witnesses], code.provenance, check=False)


@lru_cache(maxsize=4096)
def realize(recipe: Recipe) -> PirCode:
    """Build the code a recipe describes; length at most ``recipe.m``."""
    op = recipe.op
    if op == "seed":
        family, params = recipe.args
        code = _SEED_BUILDERS[family](*params)
    elif op == "concat":
        code = cb.concat(realize(recipe.args[0]), realize(recipe.args[1]))
    elif op == "sum":
        code = cb.direct_sum(realize(recipe.args[0]), realize(recipe.args[1]))
    elif op == "punct":
        child = realize(recipe.args[0])
        code = cb.puncture(child, child.m - 1)
    elif op == "shrink":
        code = cb.shrink(realize(recipe.args[0]))
    elif op == "ext":
        child = restrict_k(realize(recipe.args[0]), recipe.k - 1)
        code = cb.even_extend(child)
    else:
        raise ValueError(f"unknown recipe op {op!r}")
    code = restrict_k(code, recipe.k)
    if code.s != recipe.s or code.m > recipe.m:
        raise AssertionError(f"{recipe.text}: realized [{code.m},{code.s}] vs claimed [{recipe.m},{recipe.s}]")
    return code.with_provenance(recipe.text)


def seeds(s_max: int, k_max: int, s_cap: int = 64) -> Iterator[Recipe]:
    """Every construction the closure starts from (some outside the grid)."""
    for s in range(1, s_max + 1):
        yield _seed("identity", (s,), s, 1, s)
        yield _seed("parity", (s,), s, 2, s + 1)
        for k in range(3, k_max + 1):
            if k - 1 <= 16:
                yield _seed("cubic", (s, k), s, k, cons.cubic_truncated_length(s, k))
    for k in range(1, k_max + 1):
        yield _seed("repetition", (k,), 1, k, k)
    for s in range(1, s_max + 1):
        half = 2 ** (s - 1)
        for k in range(half, k_max + 1, half):
            yield _seed("balanced", (s, k), s, k, (2**s - 1) * k // half)
    for n in STS_ORDERS:
        b = n * (n - 1) // 6
        yield _seed("sts-column", (n,), n, (n - 1) // 2 + 1, n + b)
        yield _seed("sts-row", (n,), b, 4, b + n)
    for q in PLANE_ORDERS:
        n = q * q + q + 1
        yield _seed("pg-column", (q,), n, q + 2, 2 * n)
        yield _seed("pg-row", (q,), n, q + 2, 2 * n)
        yield _seed("ag-column", (q,), q * q, q + 2, q * q + q * q + q)
        yield _seed("ag-row", (q,), q * q + q, q + 1, q * q + q + q * q)
    for k in range(3, k_max + 1):
        r = k - 1
        while comb(r, k - 1) <= CW_ENUM_LIMIT:
            s, m = constant_weight_bound(r, k, s_cap + 1)
            if s > s_cap:
                break
            yield _seed("cw", (r, k), s, k, m)
            r += 1
    yield _seed("ml15-7", (), 7, 5, 15)
    for s in range(3, 7):
        for d in range(1, s - 1):
            yield _seed("anticode", (s, d), s, 2 ** (s - 1) - 2**d + 1 + (d >= 2), 2**s - 2**d)


def _pull_into_grid(rec: Recipe, s_max: int, k_max: int, s_slack: int) -> Recipe | None:
    if rec.s > s_max + s_slack or rec.s < 1:
        return None
    while rec.k > k_max:
        rec = Recipe("punct", rec.s, rec.k - 1, rec.m - 1, (rec,))
    while rec.s > s_max:
        rec = Recipe("shrink", rec.s - 1, rec.k, rec.m - 1, (rec,))
    return rec


# --- the closure ------------------------------------------------------------


@dataclass(frozen=True)
class BoundsCell:
    s: int
    k: int
    lower: int
    upper: int | None
    recipe: Recipe | None = field(default=None, repr=False, compare=False)
    reference: int | None = None

    @property
    def provenance(self) -> str:
        return self.recipe.text if self.recipe else ""

    @property
    def status(self) -> str:
        if self.upper is None:
            return "reference-only"
        if self.reference is None or self.upper == self.reference:
            return "match"
        return "better" if self.upper < self.reference else "worse"


def table_closure(s_max: int = 32, k_max: int = 16, s_slack: int = 32) -> dict[tuple[int, int], BoundsCell]:
    """Upper bounds on A(s, k) for ``s <= s_max``, ``k <= k_max``.

    Cells start from :func:`seeds` (constructions beyond ``s_max`` are
    shrunk into the grid if within ``s_slack``) and are relaxed with

    * concat ``(s, a) + (s, k - a)``, direct sum ``(a, k) + (s - a, k)``,
    * puncture ``(s, k + 1) - 1``, shrink ``(s + 1, k) - 1``,
    * even extension ``(s, k - 1) + 1`` for odd ``k - 1``,

    until nothing changes.  Ties prefer smaller derivations, then the
    lexicographically smaller provenance string.
    """
    if not (1 <= s_max <= 64 and 1 <= k_max <= 32):
        raise ValueError("grid too large")
    best: dict[tuple[int, int], Recipe] = {}

    def offer(rec: Recipe) -> bool:
        cur = best.get((rec.s, rec.k))
        if cur is None or rec.key < cur.key:
            best[(rec.s, rec.k)] = rec
            return True
        return False

    def propose(op: str, s: int, k: int, m: int, args: tuple) -> bool:
        cur = best.get((s, k))
        if cur is not None and m > cur.m:
            return False  # cheap reject before building the provenance text
        return offer(Recipe(op, s, k, m, args))

    for rec in seeds(s_max, k_max, s_max + s_slack):
        pulled = _pull_into_grid(rec, s_max, k_max, s_slack)
        if pulled is not None:
            offer(pulled)

    cells = [(s, k) for s in range(1, s_max + 1) for k in range(1, k_max + 1)]
    for _ in range(200):
        changed = False
        for s, k in cells:
            for a in range(1, k // 2 + 1):
                x, y = best.get((s, a)), best.get((s, k - a))
                if x and y:
                    changed |= propose("concat", s, k, x.m + y.m, (x, y))
            for a in range(1, s // 2 + 1):
                x, y = best.get((a, k)), best.get((s - a, k))
                if x and y:
                    changed |= propose("sum", s, k, x.m + y.m, (x, y))
            x = best.get((s, k + 1))
            if x and x.m - 1 >= s:
                changed |= propose("punct", s, k, x.m - 1, (x,))
            x = best.get((s + 1, k))
            if x:
                changed |= propose("shrink", s, k, x.m - 1, (x,))
            x = best.get((s, k - 1))
            if x and (k - 1) % 2 == 1:
                changed |= propose("ext", s, k, x.m + 1, (x,))
        if not changed:
            break
    out = {}
    for s, k in cells:
        rec = best.get((s, k))
        out[(s, k)] = BoundsCell(s, k, lower_bound(s, k), rec.m if rec else None, rec, table_value(s, k))
    return out


@lru_cache(maxsize=4)
def default_closure(s_max: int = 32, k_max: int = 16) -> dict[tuple[int, int], BoundsCell]:
    return table_closure(s_max, k_max)


def closure_csv(grid: dict[tuple[int, int], BoundsCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "k", "lower", "upper", "provenance", "reference_value", "status"])
    for (s, k), c in sorted(grid.items()):
        w.writerow([s, k, c.lower, c.upper, c.provenance, "" if c.reference is None else c.reference, c.status])
    return buf.getvalue()
