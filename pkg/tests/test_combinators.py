import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.combinators import (
    ShapeError,
    balanced_multiplicity_code,
    concat,
    delete_message,
    direct_sum,
    even_extend,
    puncture,
    shrink,
    simplex_minus_subspace,
)
from codedpir.constructions import cubic_code, example2_code, majority_logic_15_7
from codedpir.cosets import CosetError, CosetFamily, bk_check, bk_problems, bk_to_generator, puncture_cosets
from codedpir.gf import min_distance
from codedpir.oracle import max_pir_k
from codedpir.pircode import identity_code, parity_code, repetition_code, verify

SMALL = [parity_code(2), parity_code(3), example2_code(), cubic_code(2, 3), balanced_multiplicity_code(2, 4), majority_logic_15_7()]


def test_concat_example():
    code = concat(parity_code(2), identity_code(2))
    assert (code.m, code.s, code.k) == (5, 2, 3)
    assert verify(code)


@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_concat_adds_k(a, b):
    if a.s != b.s:
        with pytest.raises(ShapeError):
            concat(a, b)
        return
    c = concat(a, b)
    assert (c.m, c.k) == (a.m + b.m, a.k + b.k)


@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_direct_sum_keeps_min_k(a, b):
    c = direct_sum(a, b)
    assert (c.s, c.m, c.k) == (a.s + b.s, a.m + b.m, min(a.k, b.k))


@given(st.sampled_from(SMALL), st.data())
def test_puncture_drops_at_most_one(code, data):
    if code.m == code.s or code.k == 1:
        return
    pos = data.draw(st.integers(0, code.m - 1))
    p = puncture(code, pos)
    assert p.m == code.m - 1 and p.s == code.s
    assert p.k in (code.k - 1, code.k)


@pytest.mark.parametrize("code", [parity_code(3).__class__ and identity_code(3), cubic_code(2, 3), majority_logic_15_7(), repetition_code(3)])
def test_even_extend(code):
    if code.k % 2 == 0:
        with pytest.raises(ShapeError):
            even_extend(code)
        return
    e = even_extend(code)
    assert e.k == code.k + 1
    assert e.m <= code.m + 1
    assert verify(e)


def test_even_extend_5_2():
    e = even_extend(concat(parity_code(2), identity_code(2)))
    assert (e.m, e.s, e.k) == (6, 2, 4)


@pytest.mark.parametrize("code", [example2_code(), majority_logic_15_7(), cubic_code(3, 3), balanced_multiplicity_code(3, 8)])
def test_shrink(code):
    sh = shrink(code)
    assert (sh.s, sh.k) == (code.s - 1, code.k)
    assert sh.m <= code.m - 1
    assert verify(sh)


def test_delete_message():
    d = delete_message(example2_code(), 1)
    assert (d.s, d.m, d.k) == (3, 8, 3)


@pytest.mark.parametrize("s,k", [(1, 3), (2, 2), (2, 6), (3, 4), (3, 8), (4, 8), (4, 16)])
def test_balanced_meets_lower_bound(s, k):
    from codedpir.bounds import lower_bound

    code = balanced_multiplicity_code(s, k)
    assert code.m == (2**s - 1) * k // 2 ** (s - 1) == lower_bound(s, k)
    assert verify(code, check_distance=True)


def test_balanced_divisibility():
    with pytest.raises(ShapeError):
        balanced_multiplicity_code(3, 6)


@pytest.mark.parametrize("s", range(3, 7))
def test_anticode_parameters(s):
    for d in range(1, s - 1):
        code = simplex_minus_subspace(s, d)
        assert code.m == 2**s - 2**d
        assert code.k == 2 ** (s - 1) - 2**d + 1 + (d >= 2)
        assert verify(code)
        if code.m <= 24:
            assert min_distance(code.G) >= code.k


def test_anticode_k_is_tight_small():
    code = simplex_minus_subspace(4, 2)
    assert all(max_pir_k(code.G, i)[0] == code.k for i in range(4))


# --- coset view ---


def test_coset_roundtrip():
    code = example2_code()
    fam = CosetFamily.from_pir_code(code)
    assert bk_check(fam) and fam.k == 3
    back = bk_to_generator(fam)
    assert back.G == code.G and back.k == 3


def test_puncture_cosets_keeps_bk():
    fam = CosetFamily.from_pir_code(example2_code())
    for pos in range(8):
        p = puncture_cosets(fam, pos)
        assert len(p.syndromes) == 3
        assert bk_check(p)
        code = bk_to_generator(p)
        assert (code.s, code.m) == (3, 7) and verify(code)


def test_dependent_syndromes_rejected():
    code = example2_code()
    fam = CosetFamily.from_pir_code(code)
    bad = CosetFamily(fam.H, (fam.syndromes[0],) * 4, fam.members)
    assert any("dependent" in p for p in bk_problems(bad))
    with pytest.raises(CosetError):
        bk_to_generator(bad)


def test_overlapping_coset_members_rejected():
    fam = CosetFamily.from_pir_code(example2_code())
    members = list(fam.members)
    members[0] = (members[0][0], members[0][0])
    assert any("overlap" in p for p in bk_problems(CosetFamily(fam.H, fam.syndromes, tuple(members))))
