import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.gf import GF2, gf
from codedpir.protocols import (
    AffineXorProtocol,
    ProtocolError,
    RandomTape,
    TapeExhausted,
    enumerate_tapes,
    linearity_selftest,
    make_protocol,
    privacy_audit,
    tape_space_size,
    xor2,
    xork,
)

FIELDS = [GF2, gf(3), gf(4)]


def test_tape_draws_are_replayable():
    a = RandomTape.seeded(7).draw(10)
    b = RandomTape.seeded(7).draw(10)
    assert np.array_equal(a, b)


def test_explicit_tape_exhausts():
    t = RandomTape.explicit([1, 0, 1])
    assert list(t.draw(2)) == [1, 0]
    assert t.consumed == 2
    with pytest.raises(TapeExhausted):
        t.draw(2)


def test_enumerate_tapes_covers_space():
    tapes = [tuple(t.draw(3)) for t in enumerate_tapes(gf(3), 3)]
    assert len(tapes) == len(set(tapes)) == tape_space_size(gf(3), 3) == 27


@given(st.sampled_from(FIELDS), st.integers(2, 5), st.integers(1, 12), st.data())
def test_xork_correct(F, k, n, data):
    p = xork(k, F)
    x = np.array(data.draw(st.lists(st.integers(0, F.q - 1), min_size=n, max_size=n)), dtype=np.uint8)
    i = data.draw(st.integers(0, n - 1))
    seed = data.draw(st.integers(0, 2**32 - 1))
    assert p.run(x, i, RandomTape.seeded(seed, F)) == x[i]


@given(st.integers(2, 4), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_queries_sum_to_unit_vector(k, n, seed):
    F = gf(4)
    p = xork(k, F)
    i = seed % n
    qs = p.query(n, i, RandomTape.seeded(seed, F))
    total = np.zeros(n, dtype=np.uint8)
    for q in qs:
        total = F.vadd(total, q)
    assert list(total) == [int(j == i) for j in range(n)]


def test_costs_per_server():
    p = xor2()
    assert p.upload_bits(16) == 16 and p.download_bits(16) == 1
    assert xork(3, gf(4)).upload_bits(5) == 10


@pytest.mark.parametrize("p", [xor2(), xork(3), xork(2, gf(4)), xork(4, gf(3))])
def test_linearity(p):
    assert linearity_selftest(p, 9, trials=50)


def test_affine_variant_fails_linearity():
    report = linearity_selftest(AffineXorProtocol(2), 6, trials=50)
    assert not report and report.query is not None


@pytest.mark.parametrize("n", range(1, 9))
def test_xor2_exact_privacy(n):
    p = xor2()
    for j in range(2):
        for i2 in range(n):
            assert privacy_audit(p, j, n, 0, i2)


def test_xork3_exact_privacy_n4():
    p = xork(3)
    for j in range(3):
        assert all(privacy_audit(p, j, 4, 0, i) for i in range(4))


def test_sampled_audit_agrees():
    v = privacy_audit(xork(3), 1, 5, 0, 4, mode="sampled", samples=4000)
    assert v and v.distance <= v.threshold


def test_audit_detects_leaky_protocol():
    class Leaky(type(xor2())):
        def query(self, n, i, tape):
            qs = super().query(n, i, tape)
            qs[0] = np.eye(n, dtype=np.uint8)[i]
            return qs

    p = Leaky(2)
    v = privacy_audit(p, 0, 4, 0, 1)
    assert not v and v.distance == 1.0


def test_exact_audit_space_guard():
    with pytest.raises(ProtocolError):
        privacy_audit(xork(3), 0, 40, 0, 1)


def test_make_protocol():
    assert make_protocol("xork", 3).k == 3
    assert make_protocol("xor2", 2).k == 2
    with pytest.raises(ProtocolError):
        make_protocol("nope", 2)


def test_bad_index():
    with pytest.raises(ProtocolError):
        xor2().query(4, 4, RandomTape.seeded(0))


@pytest.mark.parametrize("p", [xork(3), xork(2, gf(4)), xork(4, gf(3)), AffineXorProtocol(2)])
def test_batch_paths_match_scalar(p):
    F = p.field
    n, i = 5, 3
    rng = np.random.default_rng(0)
    tapes = F.random(rng, (20, p.tape_length(n)))
    batch = p.query_batch(n, i, tapes)
    data = F.random(rng, n)
    for t, row in enumerate(tapes):
        qs = p.query(n, i, RandomTape.explicit(row, F))
        assert np.array_equal(batch[t], np.stack(qs))
        slots = np.arange(p.k)
        rows = p.answer_rows(slots, data, batch[t])
        assert np.array_equal(rows, np.stack([p.answer(j, data, q) for j, q in enumerate(qs)]))
    answers = np.stack([p.answer_rows(np.arange(p.k), data, batch[t]) for t in range(20)])
    assert list(p.reconstruct_batch(i, answers)) == [p.reconstruct(i, list(a)) for a in answers]
