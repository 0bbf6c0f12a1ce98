import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.constructions import example2_code, fano_code, gf4_code, majority_logic_15_7
from codedpir.gf import GF2, DimensionError, FieldMatrix
from codedpir.oracle import max_pir_k, minimal_recovery_sets, oracle_certify
from codedpir.packing import greedy_packing, max_set_packing
from codedpir.pircode import parity_code, verify


def _brute_packing(sets):
    best = 0
    for r in range(len(sets), 0, -1):
        for combo in itertools.combinations(range(len(sets)), r):
            used, ok = 0, True
            for j in combo:
                if sets[j] & used:
                    ok = False
                    break
                used |= sets[j]
            if ok:
                return r
    return best


@given(st.lists(st.integers(1, 2**10 - 1), max_size=11))
def test_packing_matches_brute_force(sets):
    chosen = max_set_packing(sets)
    used = 0
    for j in chosen:
        assert not sets[j] & used
        used |= sets[j]
    assert len(chosen) == _brute_packing(sets)


@given(st.lists(st.integers(1, 2**8 - 1), max_size=12))
def test_greedy_is_a_packing(sets):
    used = 0
    for j in greedy_packing(sets):
        assert not sets[j] & used
        used |= sets[j]


def test_packing_limit_stops_early():
    sets = [1 << j for j in range(10)]
    assert len(max_set_packing(sets, limit=3)) == 3


def test_oracle_example2():
    G = example2_code().G
    assert [max_pir_k(G, i)[0] for i in range(4)] == [3, 3, 3, 3]


def test_oracle_fano():
    G = fano_code().G
    assert all(max_pir_k(G, i)[0] == 4 for i in range(G.rows))


def test_oracle_majority_logic_all_coordinates():
    G = majority_logic_15_7().G
    assert all(max_pir_k(G, i)[0] == 5 for i in range(7))


@pytest.mark.parametrize("s", range(1, 11))
def test_oracle_parity(s):
    G = parity_code(s).G
    assert all(max_pir_k(G, i)[0] == 2 for i in range(s))


def test_oracle_gf4():
    G = gf4_code().G
    assert [max_pir_k(G, i)[0] for i in range(2)] == [3, 3]


def test_minimal_sets_are_minimal():
    G = example2_code().G
    sets = minimal_recovery_sets(G, 0)
    masks = [R.mask for R in sets]
    for a in masks:
        assert not any(b != a and (a & b) == b for b in masks)
    for R in sets:
        assert np.array_equal(np.bitwise_xor.reduce(G.data[:, list(R.columns)], axis=1), [1, 0, 0, 0])


@given(st.integers(2, 5), st.integers(0, 2**20 - 1))
def test_oracle_witnesses_are_valid(s, seed):
    rng = np.random.default_rng(seed)
    extra = rng.integers(0, 2, (s, rng.integers(1, 7)))
    G = FieldMatrix(GF2, np.hstack([np.eye(s, dtype=int), extra]))
    code = oracle_certify(G)
    assert verify(code)
    for i in range(s):
        assert max_pir_k(G, i)[0] >= code.k


def test_oracle_guard():
    G = FieldMatrix(GF2, np.hstack([np.eye(4, dtype=int)] * 7))
    with pytest.raises(DimensionError):
        max_pir_k(G, 0)
