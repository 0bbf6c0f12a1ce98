import itertools
from fractions import Fraction

import numpy as np
import pytest

from codedpir.constructions import (
    ML15_7_ORTHOGONAL_14,
    ML15_7_POLY,
    ConstructionError,
    build,
    constant_weight_code,
    cubic_code,
    cubic_code_for,
    cyclic_generator,
    cyclic_orthogonal_search,
    example2_code,
    expected_cubic_length,
    lexicode_rows,
    majority_logic_15_7,
    pair_packing_optimum,
    steiner_code,
    systematic_code,
)
from codedpir.designs import affine_plane, projective_plane, steiner_triple
from codedpir.gf import min_distance
from codedpir.oracle import max_pir_k
from codedpir.pircode import verify


@pytest.mark.parametrize("sigma,k", [(s, k) for s in range(2, 5) for k in range(2, 5)])
def test_cubic_parameters(sigma, k):
    code = cubic_code(sigma, k)
    assert code.s == sigma ** (k - 1)
    assert code.m == expected_cubic_length(sigma, k)
    assert verify(code, check_distance=code.s <= 24)


def test_cubic_examples():
    c = cubic_code(3, 3)
    assert (c.m, c.s) == (15, 9)
    assert c.overhead == Fraction(5, 3)
    c = cubic_code(2, 3)
    assert (c.m, c.s, c.k) == (8, 4, 3)
    assert min_distance(c.G) == 3
    assert (cubic_code(2, 4).m, cubic_code(2, 4).s) == (20, 8)


def test_cubic_cap():
    with pytest.raises(ConstructionError):
        cubic_code(10, 6, cap=1000)


@pytest.mark.parametrize("s,k", [(5, 3), (7, 3), (10, 4), (3, 5)])
def test_truncated_cubic(s, k):
    code = cubic_code_for(s, k)
    assert (code.s, code.k) == (s, k)
    assert verify(code)


def test_steiner_fano():
    code = steiner_code(projective_plane(2))
    assert (code.m, code.s, code.k) == (14, 7, 4)
    assert code.overhead == 2
    assert [max_pir_k(code.G, i)[0] for i in range(7)] == [4] * 7


def test_steiner_sts9():
    code = steiner_code(steiner_triple(9))
    assert (code.m, code.s, code.k) == (21, 9, 5)
    assert verify(code, check_distance=True)


def test_steiner_row_projective():
    code = steiner_code(projective_plane(2), "row")
    assert (code.m, code.s, code.k) == (14, 7, 4)


@pytest.mark.parametrize("n", [7, 9, 13])
@pytest.mark.parametrize("orientation", ["column", "row"])
def test_sts_codes_verify(n, orientation):
    code = steiner_code(steiner_triple(n), orientation)
    assert verify(code, check_distance=code.s <= 24)
    assert code.k == ((n - 1) // 2 + 1 if orientation == "column" else 4)


@pytest.mark.parametrize("q", [2, 3])
def test_plane_codes(q):
    for S in (projective_plane(q), affine_plane(q)):
        for o in ("column", "row"):
            code = steiner_code(S, o)
            assert verify(code, check_distance=code.s <= 24)


def test_constant_weight_example():
    code = constant_weight_code(5, 3)
    assert (code.m, code.s, code.k) == (15, 10, 3)
    M = code.G.data[:, 10:]
    assert sorted(tuple(np.nonzero(r)[0]) for r in M) == list(itertools.combinations(range(5), 2))


def test_constant_weight_7_4_matches_fano_packing():
    rows = lexicode_rows(7, 3, 4)
    assert len(rows) == 7 == len(pair_packing_optimum(7, 3))
    for a, b in itertools.combinations(rows, 2):
        assert len(set(a) & set(b)) <= 1


@pytest.mark.parametrize("r", range(4, 11))
@pytest.mark.parametrize("k", [3, 4, 5])
def test_constant_weight_codes(r, k):
    if r < k - 1:
        pytest.skip("needs r >= k - 1")
    code = constant_weight_code(r, k)
    assert code.k == k
    assert verify(code, check_distance=code.s <= 24)


def test_four_cycle_rejected():
    M = np.array([[1, 1, 0], [1, 1, 0]])
    with pytest.raises(ConstructionError):
        systematic_code(M)


def test_orthogonal_search_coordinate_14():
    J, sets = cyclic_orthogonal_search(ML15_7_POLY, 15, 14)
    assert J == 4
    assert sorted(sets) == sorted(ML15_7_ORTHOGONAL_14)


def test_cyclic_generator_rejects_non_divisor():
    with pytest.raises(ConstructionError):
        cyclic_generator(0b1101, 15 + 1)


def test_majority_logic_code():
    code = majority_logic_15_7()
    assert (code.m, code.s, code.k) == (15, 7, 5)
    assert verify(code, check_distance=True)
    assert min_distance(code.G) == 5


@pytest.mark.parametrize("family,params,mks", [
    ("cubic", {"sigma": "2", "k": "3"}, (8, 4, 3)),
    ("steiner-column", {"design": "pg", "n": "2"}, (14, 7, 4)),
    ("constant-weight", {"r": "5", "k": "3"}, (15, 10, 3)),
    ("ml15-7", {}, (15, 7, 5)),
    ("balanced", {"s": "3", "k": "8"}, (14, 3, 8)),
    ("example2", {}, (8, 4, 3)),
])
def test_build_dispatch(family, params, mks):
    code = build(family, **params)
    assert (code.m, code.s, code.k) == mks


def test_build_unknown():
    with pytest.raises(ConstructionError):
        build("nope")


def test_example2_is_systematic():
    code = example2_code()
    assert np.array_equal(code.G.data[:, :4], np.eye(4))
    # c5 = x1 + x2 and c8 = x4 + x1 (0-based columns 4 and 7)
    assert list(np.nonzero(code.G.data[:, 4])[0]) == [0, 1]
    assert list(np.nonzero(code.G.data[:, 7])[0]) == [0, 3]
