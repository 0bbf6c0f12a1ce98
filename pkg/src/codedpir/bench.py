"""Storage overhead against measured communication, across code families.

Every row is a real retrieval through the in-process transport, so the
bit counts come from encoded frames rather than from the formulas they are
compared with.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .constructions import build
from .emulation import Database, distribute
from .pircode import PirCode
from .protocols import xork
from .service.client import client_retrieve, in_process

# (family, params) pairs swept by default
DEFAULT_SWEEP: tuple[tuple[str, dict], ...] = (
    ("parity", {"s": 2}),
    ("parity", {"s": 4}),
    ("example2", {}),
    ("cubic", {"sigma": 2, "k": 3}),
    ("cubic", {"sigma": 3, "k": 3}),
    ("cubic", {"sigma": 2, "k": 4}),
    ("steiner-column", {"design": "pg", "n": 2}),
    ("steiner-column", {"design": "sts", "n": 9}),
    ("constant-weight", {"r": 5, "k": 3}),
    ("balanced", {"s": 3, "k": 4}),
    ("balanced", {"s": 3, "k": 8}),
    ("anticode", {"s": 4, "d": 2}),
    ("ml15-7", {}),
    ("gf4", {}),
)


@dataclass(frozen=True)
class BenchRow:
    family: str
    s: int
    k: int
    m: int
    q: int
    overhead: float
    n: int
    part_len: int
    upload_bits: int
    download_bits: int
    expected_upload: int
    expected_download: int
    raw_bytes: int
    exact: bool
    correct: bool


def bench_code(code: PirCode, n: int, seed: int = 0, trials: int = 4) -> BenchRow:
    """Retrieve ``trials`` random indices; accounting must be exact on each."""
    rng = np.random.default_rng(seed)
    protocol = xork(code.k, code.field)
    db = Database.random(n, code.s, code.field, rng)
    transport = in_process(distribute(db, code), protocol)
    exact = correct = True
    for _ in range(trials):
        i = int(rng.integers(0, n))
        bit, acct, _ = client_retrieve(transport, code, protocol, i, n, rng=rng)
        exact &= acct.exact
        correct &= bit == db[i]
    return BenchRow(
        code.provenance,
        code.s,
        code.k,
        code.m,
        code.field.q,
        float(code.overhead),
        n,
        db.part_len,
        acct.upload_bits,
        acct.download_bits,
        acct.expected_upload,
        acct.expected_download,
        acct.upload_bytes + acct.download_bytes,
        bool(exact),
        bool(correct),
    )


def run_bench(sweep: Iterable[tuple[str, dict]] = DEFAULT_SWEEP, sizes: Iterable[int] = (16, 64), seed: int = 0) -> list[BenchRow]:
    rows = []
    for family, params in sweep:
        code = build(family, **params)
        for n in sizes:
            rows.append(bench_code(code, n, seed))
    return rows


def bench_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    fields = list(BenchRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
    return buf.getvalue()
