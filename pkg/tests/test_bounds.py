import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.bounds import (
    BoundsCell,
    closure_csv,
    constant_weight_bound,
    counting_bound,
    cubic_bound,
    default_closure,
    dti_case1,
    dti_case2,
    girth_bound_check,
    lower_bound,
    min_parities_girth,
    realize,
    steiner_bound,
    steiner_row_bound,
    table_closure,
)
from codedpir.pircode import verify
from codedpir.reference import TABLE_A, TABLE_A_OPTIMAL, table_value


@pytest.fixture(scope="module")
def grid():
    return default_closure()


def test_lower_bound_examples():
    assert lower_bound(3, 8) == 14
    assert lower_bound(3, 15) == 27
    assert lower_bound(3, 5) == 10  # odd k pulled up by the k + 1 neighbour
    assert counting_bound(5, 4845) == Fraction(150195, 16)
    assert all(lower_bound(s, 2) == s + 1 for s in range(1, 33))
    assert all(lower_bound(1, k) == k for k in range(1, 17))


@given(st.integers(1, 20), st.integers(1, 40))
def test_lower_bound_monotone(s, k):
    lb = lower_bound(s, k)
    assert lb >= s + k - 1
    assert lower_bound(s + 1, k) >= lb
    assert lower_bound(s, k + 1) >= lb


def test_lower_bound_rejects_bad_args():
    with pytest.raises(ValueError):
        lower_bound(0, 3)


def test_formula_bounds():
    assert cubic_bound(9, 3) == 15
    assert steiner_bound(7, 4) == 14
    assert steiner_bound(8, 4) is None
    assert steiner_row_bound(7, 4) == (7, 14)
    assert constant_weight_bound(5, 3) == (10, 15)
    assert girth_bound_check(10, 5, 2) and not girth_bound_check(11, 5, 2)
    assert min_parities_girth(10, 2) == 5


def test_dti_formulas():
    p = dti_case1(1, 1)
    assert (p.m, p.r, p.k) == (3, 2, 4)
    p = dti_case1(2, 1)
    assert (p.m, p.s, p.k) == (15, 9, 4)
    p = dti_case2(2, 2)
    assert (p.m, p.s, p.k) == (15, 8, 4)


def test_closure_cells_sound(grid):
    for (s, k), cell in grid.items():
        assert isinstance(cell, BoundsCell)
        assert cell.upper is not None
        assert cell.upper >= cell.lower, (s, k)


def test_closure_starred_row_one_and_column_two(grid):
    for k in range(1, 17):
        assert grid[(1, k)].upper == k
    for s in range(1, 33):
        assert grid[(s, 2)].upper == s + 1


def test_closure_s3(grid):
    assert grid[(3, 8)].upper == 14 and grid[(3, 8)].provenance == "balanced(3,8)"
    assert grid[(3, 15)].upper == 27


def test_closure_realizes_small_cells(grid):
    for (s, k), cell in grid.items():
        if s <= 8 and k <= 6:
            code = realize(cell.recipe)
            assert (code.s, code.k) == (s, k) and code.m <= cell.upper
            assert verify(code)


def test_small_closure_independent_of_big(grid):
    small = table_closure(6, 6)
    for key, cell in small.items():
        assert cell.upper >= grid[key].upper


def test_closure_csv_header(grid):
    text = closure_csv({k: v for k, v in grid.items() if k[0] <= 2})
    assert text.splitlines()[0] == "s,k,lower,upper,provenance,reference_value,status"


def test_reference_table_shape():
    assert len(TABLE_A) == 32 * 9
    assert table_value(3, 15) == 27  # odd k derived from the k + 1 column
    assert (3, 16) in TABLE_A_OPTIMAL


def test_no_binary_9_3_code_serves_five():
    # A(3,5) = 10: exhaustive over every multiset of nine nonzero columns
    from codedpir.gf import GF2, FieldMatrix, rank
    from codedpir.oracle import max_pir_k

    best = 0
    for combo in itertools.combinations_with_replacement(range(1, 8), 9):
        G = FieldMatrix.from_rows([[(c >> r) & 1 for c in combo] for r in range(3)], GF2)
        if rank(G) == 3:
            best = max(best, min(max_pir_k(G, i, limit=5)[0] for i in range(3)))
    assert best == 4
    assert lower_bound(3, 5) == 10 == lower_bound(3, 6) - 1


@pytest.mark.xfail(strict=True, reason="ceil(7k/4) is one short of A(3,k) when k = 1 mod 4")
@pytest.mark.parametrize("k", [1, 5, 9, 13])
def test_closed_form_for_three_parts(k, grid):
    assert grid[(3, k)].upper == -(-7 * k // 4)
