import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedpir.combinators import concat, even_extend
from codedpir.constructions import build, example2_code
from codedpir.emulation import (
    Database,
    RetrievalError,
    StoreLayout,
    accounting_check,
    choose_witnesses,
    coded_privacy_audit,
    distribute,
    expected_traffic,
    format_trace,
    plan,
    retrieve,
    retrieve_robust,
    trace_rows,
)
from codedpir.gf import GF2, gf
from codedpir.pircode import identity_code, parity_code
from codedpir.protocols import xor2, xork

CODES = [example2_code(), parity_code(2), build("cubic", sigma=2, k=3), build("gf4"), build("balanced", s=3, k=4)]


def test_database_layout():
    db = Database.from_values([1, 0, 1, 1, 0], 2, GF2)
    assert db.part_len == 3
    assert db.parts.shape == (2, 3)
    assert db.locate(4) == (1, 1) and db[4] == 0


def test_distribute_encodes_columns():
    code = example2_code()
    db = Database.random(16, 4, GF2, 1)
    store = distribute(db, code)
    assert store.chunks.shape == (8, 4)
    G = code.G.data.astype(int)
    expected = (G.T @ db.parts.astype(int)) % 2
    assert np.array_equal(np.asarray(store.chunks).reshape(8, 4), expected)
    assert store.overhead == 2


@given(st.sampled_from(CODES), st.integers(1, 40), st.data())
@settings(max_examples=40)
def test_retrieval_correct(code, n, data):
    db = Database.random(n, code.s, code.field, data.draw(st.integers(0, 999)))
    store = distribute(db, code)
    p = xork(code.k, code.field)
    i = data.draw(st.integers(0, n - 1))
    bit, session = retrieve(store, p, i, rng=data.draw(st.integers(0, 999)))
    assert bit == db[i]
    assert accounting_check(session, p, store.part_len, code.m)


def test_respond_all_download():
    code = example2_code()
    p = xork(3)
    db = Database.random(16, 4, GF2, 0)
    bit, session = retrieve(distribute(db, code), p, 5, rng=0, respond_all=True)
    assert bit == db[5]
    rep = accounting_check(session, p, 4, 8)
    assert rep and rep.downloaded == 8 * 3
    assert expected_traffic(p, 4, 8) == (32, 8)


def test_envelopes_cover_every_server():
    code = example2_code()
    session = plan(StoreLayout.for_length(code, 16), xork(3), 7, rng=3)
    assert session.contacted == list(range(8))
    assert all(e.slot in range(3) for e in session.envelopes.values())
    assert sorted(session.sigma) == [0, 1, 2]


def test_plan_is_seed_deterministic():
    layout = StoreLayout.for_length(example2_code(), 16)
    a = plan(layout, xork(3), 9, rng=11)
    b = plan(layout, xork(3), 9, rng=11)
    assert all(a.envelopes[h].key() == b.envelopes[h].key() for h in range(8))


def test_layout_matches_store():
    code = example2_code()
    store = distribute(Database.random(30, 4, GF2, 0), code)
    layout = StoreLayout.for_length(code, 30)
    assert layout.part_len == store.part_len
    assert all(layout.locate(i) == store.locate(i) for i in range(30))


def test_too_many_slots():
    with pytest.raises(RetrievalError):
        choose_witnesses(parity_code(2), 0, 3)


def test_field_mismatch():
    store = distribute(Database.random(8, 2, gf(4), 0), build("gf4"))
    with pytest.raises(RetrievalError):
        retrieve(store, xork(3, GF2), 0)


@pytest.mark.parametrize("failed", range(8))
def test_robust_single_failure_example2_k2(failed):
    code = example2_code()
    db = Database.random(16, 4, GF2, 5)
    store = distribute(db, code)
    p = xork(2)
    for i in range(16):
        bit, session = retrieve_robust(store, p, i, [failed], rng=i)
        assert bit == db[i]
        assert failed not in session.envelopes
        assert accounting_check(session, p, 4, 8)


def test_robust_needs_enough_sets():
    code = example2_code()
    store = distribute(Database.random(16, 4, GF2, 5), code)
    with pytest.raises(RetrievalError):
        retrieve_robust(store, xork(3), 0, [0])  # part 0 loses its singleton set


def test_k4_code_survives_any_single_failure():
    code = even_extend(concat(parity_code(2), identity_code(2)))
    assert code.k == 4
    db = Database.random(8, 2, GF2, 2)
    store = distribute(db, code)
    p = xork(3)
    for f in range(code.m):
        for i in range(8):
            assert retrieve_robust(store, p, i, [f], rng=f * 8 + i)[0] == db[i]


def test_coded_privacy_exact_small():
    code = parity_code(2)
    store = distribute(Database.random(4, 2, GF2, 0), code)
    p = xor2()
    for h in range(3):
        assert coded_privacy_audit(store, p, h, 0, 3)


def test_unpermuted_variant_leaks():
    code = example2_code()
    store = distribute(Database.random(8, 4, GF2, 0), code)
    p = xork(3)
    leaks = [not coded_privacy_audit(store, p, h, 0, 2, permute=False) for h in range(8)]
    assert any(leaks)


def test_trace_example2():
    rows = trace_rows(example2_code(), 0, 3)
    assert [r[0] for r in rows] == [1, 2, 4, 5, 8]
    text = format_trace(example2_code(), 0, 3)
    assert "a1' = a1" in text and "c8=x1+x4" in text


def test_sweep_tapes_exhaustive_example2():
    from codedpir.emulation import sweep_tapes
    from codedpir.gf import all_messages

    code = example2_code()
    db = Database.random(16, 4, GF2, 8)
    store = distribute(db, code)
    p = xork(3)
    tapes = all_messages(GF2, p.tape_length(4))
    for i in range(16):
        assert (sweep_tapes(store, p, i, tapes, rng=i) == db[i]).all()


def test_sweep_tapes_flags_nonlinear_protocol():
    from codedpir.emulation import sweep_tapes
    from codedpir.gf import all_messages
    from codedpir.protocols import AffineXorProtocol

    code = example2_code()
    db = Database.random(16, 4, GF2, 8)
    p = AffineXorProtocol(3)
    got = sweep_tapes(distribute(db, code), p, 0, all_messages(GF2, p.tape_length(4)), rng=0)
    assert (got != db[0]).any()
