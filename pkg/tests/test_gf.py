import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.gf import (
    GF2,
    DimensionError,
    FieldError,
    FieldMatrix,
    RankError,
    dual,
    encode,
    gf,
    matrix_from_text,
    matrix_to_text,
    min_distance,
    min_distance_by_weight,
    nullspace,
    rank,
    replay_row_ops,
    rref,
    solve_left,
)

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16]


@st.composite
def field_and_elements(draw, n=3):
    q = draw(st.sampled_from(ORDERS))
    return gf(q), [draw(st.integers(0, q - 1)) for _ in range(n)]


@given(field_and_elements())
def test_field_axioms(fe):
    F, (a, b, c) = fe
    assert F.add(a, b) == F.add(b, a)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.add(a, F.neg(a)) == 0
    assert F.sub(F.add(a, b), b) == a
    if a:
        assert F.mul(a, F.inv(a)) == 1


@pytest.mark.parametrize("q", ORDERS)
def test_multiplicative_group_is_cyclic(q):
    F = gf(q)
    g = F.primitive
    powers = {F.pow(g, e) for e in range(q - 1)}
    assert powers == set(range(1, q))


@pytest.mark.parametrize("q", [1, 6, 10, 12, 512])
def test_bad_orders_rejected(q):
    with pytest.raises(FieldError):
        gf(q)


def test_gf4_tables():
    F = gf(4)
    a = F.primitive
    assert F.mul(a, a) == F.add(a, 1)  # x^2 = x + 1
    with pytest.raises(FieldError):
        F.inv(0)


def test_vector_ops_match_scalar():
    F = gf(9)
    rng = np.random.default_rng(0)
    a, b = F.random(rng, 50), F.random(rng, 50)
    assert [F.add(int(x), int(y)) for x, y in zip(a, b)] == list(F.vadd(a, b))
    assert [F.mul(int(x), int(y)) for x, y in zip(a, b)] == list(F.vmul(a, b))
    total = 0
    for x, y in zip(a, b):
        total = F.add(total, F.mul(int(x), int(y)))
    assert int(F.dot(a, b)) == total


@st.composite
def matrices(draw, max_rows=6, max_cols=9, orders=(2, 3, 4)):
    q = draw(st.sampled_from(orders))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    vals = draw(st.lists(st.integers(0, q - 1), min_size=r * c, max_size=r * c))
    return FieldMatrix(gf(q), np.array(vals).reshape(r, c))


@given(matrices())
def test_rank_nullity(M):
    N = nullspace(M)
    assert rank(M) + N.rows == M.cols
    if N.rows:
        assert not M.field.matmul(M.data, N.data.T).any()


@given(matrices())
def test_rref_replay_reproduces(M):
    R, pivots, ops = rref(M)
    assert replay_row_ops(M, ops) == R
    for r, c in enumerate(pivots):
        assert R.data[r, c] == 1
        assert np.count_nonzero(R.data[:, c]) == 1


@given(matrices(), st.data())
def test_solve_left(M, data):
    F = M.field
    x = np.array(data.draw(st.lists(st.integers(0, F.q - 1), min_size=M.cols, max_size=M.cols)), dtype=np.uint8)
    target = F.matmul(M.data, x[:, None]).ravel()
    sol = solve_left(M, target)
    assert sol is not None
    assert np.array_equal(F.matmul(M.data, sol[:, None]).ravel(), target)


def test_solve_left_inconsistent():
    M = FieldMatrix.from_rows([[1, 0], [1, 0]])
    assert solve_left(M, [1, 0]) is None


def _brute_distance(G):
    F = G.field
    best = G.cols
    for u in itertools.product(range(F.q), repeat=G.rows):
        if any(u):
            best = min(best, int(np.count_nonzero(encode(u, G))))
    return best


@given(matrices(max_rows=5, max_cols=10, orders=(2, 3, 4)))
def test_min_distance_matches_enumeration(M):
    if rank(M) != M.rows:
        with pytest.raises(RankError):
            min_distance(M)
    else:
        assert min_distance(M) == _brute_distance(M)


def test_min_distance_meet_in_middle_large_s(rng):
    # s = 16 exercises the split path; compare with the column-wise definition
    G = FieldMatrix(GF2, np.hstack([np.eye(16, dtype=int), rng.integers(0, 2, (16, 8))]))
    d = min_distance(G)
    cw = GF2.matmul(np.eye(16, dtype=np.uint8), G.data)
    assert d <= int(np.count_nonzero(cw, axis=1).min())
    assert d >= 1


def test_min_distance_large_dimension_uses_weight_search():
    G = FieldMatrix(GF2, np.eye(40, dtype=int))
    assert min_distance(G) == 1
    rep = FieldMatrix(GF2, np.hstack([np.eye(30, dtype=int)] * 3))
    assert min_distance(rep) == 3


def test_min_distance_budget():
    rng = np.random.default_rng(1)
    G = FieldMatrix(GF2, np.hstack([np.eye(40, dtype=int), rng.integers(0, 2, (40, 40))]))
    with pytest.raises(DimensionError):
        min_distance(G, budget=1000)


@given(matrices(orders=(2, 3, 4), max_rows=5, max_cols=9))
def test_weight_search_matches_enumeration(M):
    if rank(M) < M.rows:
        return
    assert min_distance_by_weight(M) == min_distance(M)


def test_dual_is_orthogonal():
    G = FieldMatrix.from_rows([[1, 0, 0, 1, 1], [0, 1, 0, 1, 0], [0, 0, 1, 0, 1]])
    H = dual(G)
    assert H.shape == (2, 5)
    assert not GF2.matmul(G.data, H.data.T).any()


def test_dual_requires_full_rank():
    with pytest.raises(RankError):
        dual(FieldMatrix.from_rows([[1, 1], [1, 1]]))


@given(matrices(orders=(2, 16)))
def test_text_roundtrip(M):
    assert matrix_from_text(matrix_to_text(M)) == M


def test_entries_checked():
    with pytest.raises(FieldError):
        FieldMatrix(GF2, np.array([[0, 2]]))
    with pytest.raises(DimensionError):
        FieldMatrix(GF2, np.array([1, 0]))
