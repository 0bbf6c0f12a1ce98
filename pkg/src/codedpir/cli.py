"""Command-line interface.

Exit codes: 0 success, 1 domain failure (verification failed, retrieval
error, unreachable server), 2 usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

import numpy as np

from . import arraycodes as ac
from .bench import DEFAULT_SWEEP, bench_csv, run_bench
from .bounds import closure_csv, default_closure, lower_bound, table_closure
from .constructions import build, example2_code
from .emulation import Database, accounting_check, distribute, format_trace, retrieve, retrieve_robust
from .gf import gf, min_distance
from .oracle import max_pir_k
from .pircode import PirCode, verify
from .protocols import make_protocol, privacy_audit
from .report import format_report
from .service.client import TcpTransport, array_client_retrieve, client_retrieve, in_process, upload
from .service.config import ServiceConfig
from .service.server import ServerState, start_server

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _params(pairs: list[str]) -> dict:
    out = {}
    for p in pairs or []:
        key, sep, val = p.partition("=")
        if not sep:
            raise UsageError(f"parameter {p!r} is not key=value")
        out[key] = val
    return out


def _load_code(path: str) -> PirCode:
    return PirCode.loads(Path(path).read_text())


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _read_values(path: str) -> np.ndarray:
    text = Path(path).read_text().split()
    if len(text) == 1 and set(text[0]) <= {"0", "1"}:
        return np.array([int(c) for c in text[0]], dtype=np.uint8)
    return np.array([int(v) for v in text], dtype=np.uint8)


# --- code -------------------------------------------------------------------


def cmd_code_build(a) -> int:
    code = build(a.family, **_params(a.param))
    _write(code.dumps() + "\n", a.output)
    print(f"built {code!r} overhead={code.overhead}", file=sys.stderr)
    return EXIT_OK


def cmd_code_verify(a) -> int:
    code = _load_code(a.file)
    report = verify(code, check_distance=a.distance)
    print(report)
    return EXIT_OK if report else EXIT_FAIL


def cmd_code_oracle(a) -> int:
    code = _load_code(a.file)
    k, sets = max_pir_k(code.G, a.index)
    print(k)
    if a.sets:
        for R in sets:
            print(R)
    return EXIT_OK


def cmd_code_export(a) -> int:
    code = _load_code(a.file)
    if a.format == "json":
        _write(code.dumps() + "\n", a.output)
        return EXIT_OK
    F = code.field
    lines = [f"# {code.provenance} [{code.m},{code.s}] q={F.q} k={code.k} d={min_distance(code.G)}"]
    lines += [" ".join(F.format(int(v)) for v in row) for row in code.G.data]
    if a.format == "text":
        for i, sets in enumerate(code.witnesses):
            lines.append(f"x{i}: " + " ".join(str(R) for R in sets))
    _write("\n".join(lines) + "\n", a.output)
    return EXIT_OK


# --- bounds -----------------------------------------------------------------


def cmd_bounds_table(a) -> int:
    grid = default_closure() if (a.s_max, a.k_max) == (32, 16) else table_closure(a.s_max, a.k_max)
    _write(closure_csv(grid), a.output)
    return EXIT_OK


def cmd_bounds_cell(a) -> int:
    if a.s <= 32 and a.k <= 16:
        c = default_closure()[(a.s, a.k)]
        print(f"lower={c.lower} upper={c.upper} provenance={c.provenance}")
    else:
        print(f"lower={lower_bound(a.s, a.k)} upper=? provenance=")
    return EXIT_OK


# --- protocol ---------------------------------------------------------------


def cmd_protocol_audit(a) -> int:
    p = make_protocol(a.protocol, a.k, gf(a.q))
    v = privacy_audit(p, a.server, a.n, a.i1, a.i2, mode=a.mode, samples=a.samples, seed=a.seed)
    print(f"{'identical' if v.identical else 'DIFFERENT'} mode={v.mode} space={v.space} tv={v.distance:.6f}")
    return EXIT_OK if v else EXIT_FAIL


# --- emulate ----------------------------------------------------------------


def _code_from(a) -> PirCode:
    if getattr(a, "example2", False):
        return example2_code()
    if a.file:
        return _load_code(a.file)
    if a.family:
        return build(a.family, **_params(a.param))
    raise UsageError("give --file, --family or --example2")


def cmd_emulate_run(a) -> int:
    code = _code_from(a)
    k = a.k or code.k
    p = make_protocol(a.protocol, k, code.field)
    db = Database.random(a.n, code.s, code.field, a.seed)
    store = distribute(db, code)
    rng = np.random.default_rng(a.seed)
    indices = range(db.data.size) if a.index is None else [a.index]
    bad = 0
    for i in indices:
        if a.failed:
            bit, sess = retrieve_robust(store, p, i, a.failed, rng)
        else:
            bit, sess = retrieve(store, p, i, rng, respond_all=a.respond_all)
        acct = accounting_check(sess, p, store.part_len, code.m)
        ok = bit == db[i] and acct.ok
        bad += not ok
        if a.index is not None or not ok:
            print(f"i={i} bit={bit} expected={db[i]} upload={acct.uploaded} download={acct.downloaded} "
                  f"(expected {acct.expected_upload}/{acct.expected_download}) {'ok' if ok else 'FAIL'}")
    if a.index is None:
        print(f"{len(indices) - bad}/{len(indices)} retrievals correct with exact accounting")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_emulate_trace(a) -> int:
    code = _code_from(a)
    if not 1 <= a.part <= code.s:
        raise UsageError(f"--part must be in 1..{code.s}")
    sys.stdout.write(format_trace(code, a.part - 1, a.k or code.k))
    return EXIT_OK


# --- array ------------------------------------------------------------------


_ARRAY_EXAMPLES = {"2x25": ac.example_2x25, "7x4": ac.example_7x4}


def cmd_array_build(a) -> int:
    if (a.t is None) == (a.example is None):
        raise UsageError("give exactly one of --t or --example")
    code = ac.apir(a.t) if a.t is not None else _ARRAY_EXAMPLES[a.example]()
    _write(code.dumps() + "\n", a.output)
    print(f"built {code.name}: {code.m1}x{code.m2}, s={code.s_total}, k={code.k}, overhead={code.overhead}", file=sys.stderr)
    return EXIT_OK


def cmd_array_verify(a) -> int:
    code = ac.ArrayCode.loads(Path(a.file).read_text())
    rep = ac.array_verify(code)
    print(rep)
    if a.search:
        for i in range(code.s_total):
            print(f"x{i}: max k = {ac.array_max_k(code, i)[0]}")
    return EXIT_OK if rep else EXIT_FAIL


def cmd_array_get(a) -> int:
    code = ac.ArrayCode.loads(Path(a.file).read_text())
    p = make_protocol("xork", a.k or code.k)
    db = Database.random(a.n, code.s_total, p.field, a.seed)
    transport = in_process(ac.array_distribute(db, code), p)
    bit, acct, _ = array_client_retrieve(transport, code, p, a.index, a.n, rng=a.seed)
    print(f"bit={bit} expected={db[a.index]} {acct.summary()}")
    return EXIT_OK if bit == db[a.index] and acct.exact else EXIT_FAIL


# --- service ----------------------------------------------------------------


def cmd_serve(a) -> int:
    cfg = ServiceConfig.load(a.config)
    which = range(len(cfg.servers)) if a.index is None else [a.index]

    async def main():
        servers = [await start_server(ServerState(h), *cfg.servers[h]) for h in which]
        for h in which:
            print(f"server {h} listening on {cfg.servers[h][0]}:{cfg.servers[h][1]}", flush=True)
        await asyncio.gather(*(s.serve_forever() for s in servers))

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_get(a) -> int:
    cfg = ServiceConfig.load(a.config)
    code = cfg.load_code()
    p = cfg.protocol(code)
    transport = TcpTransport(cfg.servers, timeout=a.timeout)
    seed = a.seed if a.seed is not None else cfg.seed
    is_array = isinstance(code, ac.ArrayCode)
    n = a.n
    if a.upload:
        values = _read_values(a.upload)
        n = values.size
        s = code.s_total if is_array else code.s
        db = Database.from_values(values, s, p.field)
        store = ac.array_distribute(db, code) if is_array else distribute(db, code)
        upload(transport, store, p)
    if n is None:
        raise UsageError("give -n or --upload")
    if is_array:
        bit, acct, _ = array_client_retrieve(transport, code, p, a.index, n, rng=seed)
    else:
        bit, acct, _ = client_retrieve(transport, code, p, a.index, n, rng=seed, robust=a.robust)
    print(f"bit={bit}")
    print(acct.summary())
    return EXIT_OK if acct.exact else EXIT_FAIL


def cmd_bench(a) -> int:
    rows = run_bench(DEFAULT_SWEEP, a.n, a.seed)
    _write(bench_csv(rows), a.output)
    return EXIT_OK if all(r.exact and r.correct for r in rows) else EXIT_FAIL


def cmd_ledger(a) -> int:
    sys.stdout.write(format_report(include_closure=a.all))
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_code_source(p):
    p.add_argument("-f", "--file", help="code JSON")
    p.add_argument("--family", help="construction family (see `code build`)")
    p.add_argument("-p", "--param", action="append", help="family parameter key=value")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="codedpir", description="Coded private information retrieval toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)

    code = sub.add_parser("code", help="build, verify and inspect PIR codes").add_subparsers(dest="sub", required=True)
    p = code.add_parser("build", help="construct a code and print its JSON")
    p.add_argument("family", help="cubic, steiner-column, steiner-row, constant-weight, balanced, anticode, "
                                  "parity, identity, ml15-7, example2, gf4")
    p.add_argument("-p", "--param", action="append", help="key=value, e.g. -p sigma=3 -p k=3")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_code_build)
    p = code.add_parser("verify", help="check a code's recovery-set certificate")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--distance", action="store_true", help="also check min distance >= k")
    p.set_defaults(func=cmd_code_verify)
    p = code.add_parser("oracle", help="brute-force the number of disjoint recovery sets of one message index")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("-i", "--index", type=int, required=True, help="0-based message index")
    p.add_argument("--sets", action="store_true", help="also print the disjoint sets found")
    p.set_defaults(func=cmd_code_oracle)
    p = code.add_parser("export", help="print the generator matrix")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--format", choices=["text", "matrix", "json"], default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_code_export)

    bounds = sub.add_parser("bounds", help="bounds on A(s,k)").add_subparsers(dest="sub", required=True)
    p = bounds.add_parser("table", help="CSV of the closure grid")
    p.add_argument("--s-max", type=int, default=32)
    p.add_argument("--k-max", type=int, default=16)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bounds_table)
    p = bounds.add_parser("cell", help="one cell of the grid")
    p.add_argument("-s", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_bounds_cell)

    proto = sub.add_parser("protocol", help="base protocol checks").add_subparsers(dest="sub", required=True)
    p = proto.add_parser("audit", help="compare one server's query law for two indices")
    p.add_argument("--protocol", default="xork")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-q", type=int, default=2, help="field size")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--server", type=int, default=0)
    p.add_argument("--i1", type=int, default=0)
    p.add_argument("--i2", type=int, default=1)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_protocol_audit)

    emu = sub.add_parser("emulate", help="run a protocol over coded storage in memory").add_subparsers(dest="sub", required=True)
    p = emu.add_parser("run", help="retrieve one index (or all) and check accounting")
    _add_code_source(p)
    p.add_argument("--example2", action="store_true")
    p.add_argument("--protocol", default="xork")
    p.add_argument("-k", type=int, help="protocol servers (default: the code's k)")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-i", "--index", type=int, help="0-based index; omit to sweep all")
    p.add_argument("--failed", type=int, nargs="*", default=[], help="0-based servers known to be down")
    p.add_argument("--respond-all", action="store_true", help="servers answer for every slot")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_emulate_run)
    p = emu.add_parser("trace", help="print the query/response table for one part")
    _add_code_source(p)
    p.add_argument("--example2", action="store_true")
    p.add_argument("--part", type=int, required=True, help="part number, 1-based like the printed labels")
    p.add_argument("-k", type=int)
    p.set_defaults(func=cmd_emulate_trace)

    arr = sub.add_parser("array", help="PIR array codes").add_subparsers(dest="sub", required=True)
    p = arr.add_parser("build")
    p.add_argument("--t", type=int, choices=[2, 3])
    p.add_argument("--example", choices=sorted(_ARRAY_EXAMPLES))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_array_build)
    p = arr.add_parser("verify")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--search", action="store_true", help="also brute-force the max k per bit (m2 <= 30)")
    p.set_defaults(func=cmd_array_verify)
    p = arr.add_parser("get", help="retrieve one bit of a random database through in-process servers")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-i", "--index", type=int, required=True)
    p.add_argument("-k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_array_get)

    p = sub.add_parser("serve", help="run storage daemons from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--index", type=int, help="only this server (default: all in the config)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("get", help="private retrieval against running daemons")
    p.add_argument("--config", required=True)
    p.add_argument("-i", "--index", type=int, required=True)
    p.add_argument("-n", type=int, help="database length (implied by --upload)")
    p.add_argument("--upload", help="database file (0/1 string or whitespace-separated values) to store first")
    p.add_argument("--robust", action="store_true", help="plan around unreachable servers")
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float, default=5.0)
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("bench", help="CSV of storage overhead vs measured communication")
    p.add_argument("-n", type=int, nargs="+", default=[16, 64])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ledger", help="published values that disagree with derived ones")
    p.add_argument("--all", action="store_true", help="list every table cell that differs")
    p.set_defaults(func=cmd_ledger)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
