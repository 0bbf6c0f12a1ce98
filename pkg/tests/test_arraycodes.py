import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from codedpir.arraycodes import (
    ArrayCode,
    ArrayCodeError,
    ArrayRecipe,
    apir,
    apir_parameters,
    array_distribute,
    array_max_k,
    array_retrieve,
    array_verify,
    baranyai_partition,
    example_2x25,
    example_7x4,
    identity_array,
    minimal_column_sets,
)
from codedpir.emulation import Database
from codedpir.gf import GF2, gf
from codedpir.protocols import xor2, xork


@pytest.fixture(scope="module")
def ex25():
    return example_2x25()


def test_example_2x25_shape(ex25):
    assert (ex25.m1, ex25.m2, ex25.s_total, ex25.k) == (2, 25, 6, 15)
    assert array_verify(ex25)
    assert ex25.overhead == Fraction(25, 3)
    assert ex25.per_server_ratio == 3


def test_example_2x25_bit0_sets(ex25):
    sets = [R.columns for R in ex25.witnesses[0]]
    singles = [c for c in sets if len(c) == 1]
    assert len(singles) == 5  # the five pairs containing bit 0
    assert all(len(c) == 2 and c[1] >= 15 for c in sets if len(c) > 1)
    assert len({c for cols in sets for c in cols}) == sum(len(c) for c in sets)


def test_example_2x25_is_tight(ex25):
    for i in (0, 3):
        assert array_max_k(ex25, i)[0] == 15


def test_apir_parameters():
    assert {k: apir_parameters(2)[k] for k in ("m2", "k", "s")} == {"m2": 25, "k": 15, "s": 3}
    assert {k: apir_parameters(3)[k] for k in ("m2", "k", "s")} == {"m2": 385, "k": 220, "s": 4}
    p4 = apir_parameters(4)
    assert (p4["k"], p4["m2"]) == (4845, 8721)


def test_apir3_built_and_verified():
    code = apir(3)
    assert (code.m1, code.m2, code.k) == (3, 385, 220)
    assert array_verify(code)


def test_apir_t4_not_built():
    with pytest.raises(ArrayCodeError):
        apir(4)


@pytest.mark.parametrize("n,a", [(6, 3), (6, 2), (8, 4), (9, 3)])
def test_baranyai_partition(n, a):
    classes = baranyai_partition(n, a)
    assert len(classes) == math.comb(n - 1, a - 1)
    for cls in classes:
        assert sorted(b for S in cls for b in S) == list(range(n))
    every = sorted(S for cls in classes for S in cls)
    assert every == list(itertools.combinations(range(n), a))


def test_example_7x4():
    code = example_7x4()
    assert (code.m1, code.m2, code.s_total) == (7, 4, 12)
    assert code.k == 3 and array_verify(code)


def test_verify_catches_bad_recipe(ex25):
    ws = list(ex25.witnesses)
    ws[0] = (ArrayRecipe(((0, 1),)),) + ws[0][1:]
    rep = array_verify(ArrayCode(ex25.m1, ex25.m2, ex25.s_total, ex25.cells, tuple(ws)))
    assert not rep and rep.bit == 0 and "sum" in str(rep)


def test_delete_columns_drops_sets(ex25):
    smaller = ex25.delete_columns([0])
    assert smaller.m2 == 24 and array_verify(smaller)
    assert smaller.k == 14


def test_json_roundtrip(ex25):
    assert ArrayCode.loads(ex25.dumps()) == ex25


def test_identity_array():
    code = identity_array(4)
    assert code.k == 1 and minimal_column_sets(code, 2) == [1 << 2]


def test_exhaustive_retrieval_2x25(ex25):
    db = Database.random(24, 6, GF2, 0)
    store = array_distribute(db, ex25)
    for k in (2, 15):
        p = xork(k)
        for i in range(24):
            bit, session = array_retrieve(store, p, i, rng=i)
            assert bit == db[i]
            assert session.uploaded_bits == 25 * 4
            assert session.downloaded_bits == 25 * 2


def test_array_rejects_wrong_field(ex25):
    with pytest.raises(ArrayCodeError):
        array_distribute(Database.random(12, 6, gf(3), 0), ex25)
