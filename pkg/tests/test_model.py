from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valuedisj.model import (
    BranchFixing, MipInstance, ParseError, ValidationError, apply_fixing, generate_market_split,
    parse_blocks, parse_instance, serialize_blocks, serialize_instance, validate_partition,
)
from conftest import fixture


def test_parse_example1(ex1):
    assert ex1.n_int == 8 and ex1.upper_bounds == (1,) * 8
    assert len(ex1.rows) == 1
    assert ex1.rows[0].int_coeffs == tuple(map(Fraction, (8, -1, -2, -3, -4, -5, -6, -7)))
    assert ex1.rows[0].rhs == 0


def test_parse_example3(ex3):
    assert ex3.upper_bounds == (2, 2, 2, 2)


def test_empty_rows_is_full_box():
    inst = parse_instance("ints 2\nbounds 1 2\n")
    assert inst.rows == ()
    assert inst.box_size() == 6


def test_parse_continuous_and_objective():
    inst = parse_instance("ints 2\nconts 1\nbounds 1 1\nobj min 1 2 3\nrow 1 1 | -1 >= 1/2\n")
    assert inst.n_cont == 1
    assert inst.rows[0].cont_coeffs == (Fraction(-1),)
    assert inst.rows[0].rhs == Fraction(1, 2)
    assert inst.objective.sense == "min"


@pytest.mark.parametrize("text", [
    "bounds 1\n",
    "ints 2\nbounds 1\n",
    "ints 1\nbounds 1\nrow 1 2 <= 3\n",
    "ints 1\nbounds 1\nrow 1 3\n",
    "ints 1\nbounds 1\nfoo 1\n",
    "ints 1\nbounds 1\nrow 0.5 <= 1\n",
])
def test_parse_errors(text):
    with pytest.raises((ParseError, ValidationError)):
        parse_instance(text)


def test_parse_error_has_line_number():
    with pytest.raises(ParseError) as exc:
        parse_instance("ints 1\nbounds 1\n\nrow 1 2 <= 3\n")
    assert exc.value.line == 4


def test_negative_bound_rejected():
    with pytest.raises(ValidationError):
        parse_instance("ints 1\nbounds -1\n")


def test_roundtrip_fixtures():
    for name in ("ex1.mip", "ex2.mip", "ex3.mip", "ex5.mip", "ex1_product.mip", "instance4.mip"):
        inst = fixture(name)
        assert parse_instance(serialize_instance(inst)) == inst


def test_blocks_roundtrip():
    blocks = parse_blocks("1 2\n3\n# comment\n4\n")
    assert blocks == [(0, 1), (2,), (3,)]
    assert parse_blocks(serialize_blocks(blocks)) == blocks


def test_validate_partition():
    ex2 = fixture("ex2.mip")
    part = validate_partition(ex2, [(0, 1, 2, 3)])
    assert len(part) == 7 and part[0] == (0, 1, 2, 3)
    inst3 = MipInstance.build([], [1, 1, 1])
    assert validate_partition(inst3, []) == ((0,), (1,), (2,))
    with pytest.raises(ValidationError):
        validate_partition(inst3, [(0, 1), (1, 2)])


def test_apply_fixing_examples(ex5):
    both = apply_fixing(ex5, {6: 1, 7: 1})
    assert both.n_int == 6
    assert both.rows[0].int_coeffs == tuple(map(Fraction, (7, 5, -1, -1, -2, -3)))
    assert both.rows[0].rhs == 11
    assert apply_fixing(ex5, {}) == ex5
    zero = apply_fixing(ex5, BranchFixing.of({6: 0, 7: 0}))
    assert zero.rows[0].int_coeffs == ex5.rows[0].int_coeffs[:6]
    assert zero.rows[0].rhs == ex5.rows[0].rhs
    assert zero.origin == (0, 1, 2, 3, 4, 5)


def test_apply_fixing_rejects_out_of_bounds(ex5):
    with pytest.raises(ValidationError):
        apply_fixing(ex5, {0: 2})


def test_market_split_generator():
    a = serialize_instance(generate_market_split(2, 10, 1))
    assert a == serialize_instance(generate_market_split(2, 10, 1))
    one = generate_market_split(1, 2, 7)
    r = one.rows[0]
    assert r.sense == "=" and r.rhs == sum(r.int_coeffs) // 2


@given(st.integers(min_value=0, max_value=2 ** 32))
def test_market_split_range(seed):
    inst = generate_market_split(2, 10, seed)
    for r in inst.rows:
        assert all(0 <= a <= 99 for a in r.int_coeffs)
        assert r.rhs == sum(r.int_coeffs) // 2


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.integers(-5, 10),
       st.tuples(st.integers(0, 1), st.integers(0, 1)))
def test_fixing_preserves_feasibility(coeffs, rhs, vals):
    inst = MipInstance.build([(coeffs, rhs)], [1, 1, 1])
    sub = apply_fixing(inst, {0: vals[0], 2: vals[1]})
    for x1 in (0, 1):
        full = (vals[0], x1, vals[1])
        assert inst.is_feasible_point(full) == sub.is_feasible_point((x1,))
