"""Places where published reference values and derived values disagree.

Every entry is recomputed from the library on each call; nothing here is a
stored answer except the published value being compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arraycodes import apir_parameters
from .bounds import counting_bound, default_closure, lower_bound
from .combinators import balanced_multiplicity_code, puncture
from .pircode import verify
from .reference import ARRAY_COMPARISON


@dataclass(frozen=True)
class Discrepancy:
    topic: str
    published: str
    derived: str
    note: str

    def line(self) -> str:
        return f"{self.topic}: published={self.published} derived={self.derived} ({self.note})"


def a315() -> Discrepancy:
    """Both bounds on A(3,15) rebuilt: the counting bound and a verified code."""
    code = puncture(balanced_multiplicity_code(3, 16), 0)
    lower = lower_bound(3, 15)
    upper = code.m if verify(code) and code.k >= 15 else None
    derived = str(lower) if upper == lower else f"{lower}..{upper}"
    return Discrepancy(
        "A(3,15)",
        "26",
        derived,
        f"lower bound ceil(7*15/4)={lower}, upper bound {upper} via {code.provenance}",
    )


def array_lower_bound(t: int) -> Discrepancy:
    s, k, _, published, _ = ARRAY_COMPARISON[t]
    exact = counting_bound(s, k)
    ceiling = -(-exact.numerator // exact.denominator)
    note = f"ceiling of the exact rational bound {exact} = {float(exact):.4f}"
    if lower_bound(s, k) > ceiling:
        note += f"; the odd-k neighbour argument raises it to {lower_bound(s, k)}"
    return Discrepancy(f"array t={t} lower bound on A({s},{k})", str(published), str(ceiling), note)


def closure_mismatches() -> list[Discrepancy]:
    """Table cells where the rebuilt closure differs from the published table."""
    out = []
    for (s, k), c in sorted(default_closure().items()):
        if c.status in ("better", "worse"):
            out.append(Discrepancy(f"A({s},{k}) upper bound", str(c.reference), str(c.upper), f"{c.status}; {c.provenance}"))
    return out


def array_parameter_checks() -> list[Discrepancy]:
    """m2 and k of the array family against the published comparison rows."""
    out = []
    for t, (s, k, m2, _, _) in sorted(ARRAY_COMPARISON.items()):
        p = apir_parameters(t)
        if (p["k"], p["m2"]) != (k, m2):
            out.append(Discrepancy(f"array t={t} (k, m2)", f"({k}, {m2})", f"({p['k']}, {p['m2']})", "parameter formula"))
    return out


def discrepancies(include_closure: bool = True) -> list[Discrepancy]:
    items = [a315()]
    items += [array_lower_bound(t) for t in sorted(ARRAY_COMPARISON) if t >= 3]
    items = [d for d in items if d.published != d.derived]
    items += array_parameter_checks()
    if include_closure:
        items += closure_mismatches()
    return items


def format_report(include_closure: bool = False) -> str:
    """Headline discrepancies, then either every closure mismatch or a tally."""
    lines = [d.line() for d in discrepancies(include_closure=include_closure)]
    if not include_closure:
        tally: dict[str, int] = {}
        for c in default_closure().values():
            tally[c.status] = tally.get(c.status, 0) + 1
        lines.append("table cells: " + " ".join(f"{k}={v}" for k, v in sorted(tally.items())))
    return "\n".join(lines) + "\n"
