from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valuedisj import exactmath as em


def test_rat_coercion():
    assert em.rat("3/6") == Fraction(1, 2)
    assert em.rat(4) == Fraction(4)
    assert em.rat(Fraction(-2, 4)) == Fraction(-1, 2)
    with pytest.raises(em.ExactMathError):
        em.rat(0.5)


@pytest.mark.parametrize("a,b,op,want", [
    ("1/2", "1/3", "add", Fraction(5, 6)),
    ("2/4", "0", "mul", Fraction(0)),
    ("7", "-3", "div", Fraction(-7, 3)),
    ("1", "1/4", "sub", Fraction(3, 4)),
])
def test_rat_arith_examples(a, b, op, want):
    got = em.rat_arith(em.rat(a), em.rat(b), op)
    assert got == want
    assert got.denominator > 0


def test_division_by_zero():
    with pytest.raises(em.ExactMathError):
        em.rat_arith(Fraction(1), Fraction(0), "div")


def test_format():
    assert em.format_rat(Fraction(-7, 3)) == "-7/3"
    assert em.format_rat(Fraction(4)) == "4"
    assert em.format_rat_decimal(Fraction(1, 12)).startswith("1/12 (0.0833")


def test_row_reduce_examples():
    r, R, piv = em.row_reduce([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert r == 3 and piv == [0, 1, 2]
    assert em.rank([[1, 2], [2, 4]]) == 1


def test_linking_points_difference_rank():
    # integer points of the n=2 linking set, coordinates (x1, x2, y1, y2)
    pts = [(0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 1, 0), (1, 1, 0, 1)]
    diffs = [[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]
    assert em.rank(diffs) == 3  # one affine-hull equation in 4 dimensions


def test_affine_hull_examples():
    assert em.affine_hull([(0, 0), (1, 0), (0, 1)]) == []
    eqs = em.affine_hull([(1, 1), (2, 2)])
    assert eqs == [((1, -1), 0)]
    pts = [(0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 1, 0), (1, 1, 0, 1)]
    assert em.affine_hull(pts) == [((1, 1, -1, -2), 0)]


def test_integer_scale_keeps_sign():
    assert em.integer_scale([Fraction(-1, 2), Fraction(1, 3)]) == [-3, 2]
    assert em.integer_scale([0, 0]) == [0, 0]


small = st.fractions(min_value=-50, max_value=50, max_denominator=12)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_nullspace_is_annihilated(M):
    null = em.nullspace(M, 3)
    assert len(null) + em.rank(M) == 3
    for v in null:
        for row in M:
            assert em.dot(row, v) == 0


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=5))
def test_rref_properties(M):
    r, R, piv = em.row_reduce(M)
    assert r == len(piv)
    for i, p in enumerate(piv):
        assert R[i][p] == 1
        assert all(R[k][p] == 0 for k in range(len(R)) if k != i)


@given(small, small, st.sampled_from(["add", "sub", "mul"]))
def test_arith_matches_fraction(a, b, op):
    want = {"add": a + b, "sub": a - b, "mul": a * b}[op]
    assert em.rat_arith(a, b, op) == want
