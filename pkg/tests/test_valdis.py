import itertools
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from valuedisj.model import MipInstance, apply_fixing
from valuedisj.polyhedra import count_facets, enumerate_feasible_points, instance_hull
from valuedisj.valdis import build_extended_formulation, enumerate_value_set, verify_structure_theorem
from conftest import fixture


def test_value_set_example3(ex3):
    vs = enumerate_value_set(ex3, (0, 1))
    assert [v[0] for v in vs.values] == [1, 2, 3, 4]
    assert vs.witnesses[0] == (0, 1)


def test_value_set_skips_zero_and_dedups():
    inst = MipInstance.build([([1, -1], 1)], [1, 1])
    vs = enumerate_value_set(inst, (0, 1))
    assert [v[0] for v in vs.values] == [-1, 1]


def test_extended_formulation_example3(ex3):
    ef = build_extended_formulation(ex3, [(0, 1), (2,), (3,)])
    assert ef.n_y == 4
    inst = ef.instance
    assert inst.n_int == 8
    agg = inst.rows[ef.aggregated_rows[0]]
    assert agg.int_coeffs == tuple(map(Fraction, (0, 0, 2, 3, 1, 2, 3, 4)))
    link = inst.rows[ef.linking_rows[0]]
    assert link.sense == "=" and link.int_coeffs == tuple(map(Fraction, (1, 1, 0, 0, -1, -2, -3, -4)))
    sos = inst.rows[ef.sos_rows[0]]
    assert sos.int_coeffs[4:] == (1, 1, 1, 1) and sos.rhs == 1
    assert ef.map_lines()[0] == "y 5 block 1,2 value 1"


def test_value_disjunction_of_example2_has_77_facets():
    ex2 = fixture("ex2.mip")
    ef = build_extended_formulation(ex2, [(0, 1, 2, 3)])
    poly = instance_hull(ef.instance)
    assert count_facets(poly)[0] == 77


def test_lift_is_a_bijection_on_integer_points(ex3):
    ef = build_extended_formulation(ex3, [(0, 1), (2,), (3,)])
    orig = {tuple(int(v) for v in p) for p in enumerate_feasible_points(ex3)}
    ext = {tuple(int(v) for v in p) for p in enumerate_feasible_points(ef.instance)}
    assert {ef.lift(x) for x in orig} == ext
    assert {p[:4] for p in ext} == orig


def test_structure_check_example3(ex3):
    chk = verify_structure_theorem(ex3, [(0, 1), (2,), (3,)])
    assert chk.holds
    assert len(chk.intersected.facets) == 13
    assert [(e.coeffs, e.rhs) for e in chk.intersected.equations] == [((1, 1, 0, 0, -1, -2, -3, -4), 0)]


@settings(max_examples=8)
@given(st.integers(0, 10 ** 6))
def test_structure_check_random(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 5)
    rows = [([rng.randint(-9, 9) for _ in range(n)], rng.randint(0, 12)) for _ in range(2)]
    inst = MipInstance.build(rows, [1] * n)
    if len(enumerate_feasible_points(inst)) == 0:
        return
    block = tuple(sorted(rng.sample(range(n), 3)))
    assert verify_structure_theorem(inst, [block]).holds
