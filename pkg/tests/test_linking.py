import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from valuedisj.linking import (
    cover_form_equivalence_check, exhaustive_separation, family_a, knapsack_k_extended_description,
    linking_facet_count, linking_facets, linking_points, separate_linking,
)
from valuedisj.model import MipInstance
from valuedisj.polyhedra import CapExceeded, check_projection_equality, hull_facets, instance_hull


@pytest.mark.parametrize("n", [1, 3, 4, 5])
def test_closed_form_matches_hull(n):
    desc = linking_facets(n)
    assert len(desc.facets) == linking_facet_count(n)
    assert desc.polyhedron().same_as(hull_facets(linking_points(n)))


def test_block_of_two_has_a_redundant_row():
    # with n = 2, y1 >= 0 is the sum of the two singleton rows
    assert len(hull_facets(linking_points(2)).facets) == 4
    assert len(linking_facets(2).facets) == 5


def test_family_a_example():
    assert family_a(3, (0, 2)).coeffs == (1, 0, 1, -1, -2, -2)


def test_symbolic_mode_and_cap():
    d = linking_facets(20, mode="symbolic")
    assert d.symbolic and next(iter(d.facets)).descriptor() == "family a: T=1"
    with pytest.raises(CapExceeded):
        linking_facets(20)


def test_separation_examples():
    r = separate_linking(2, [1, 0], [Fraction(1, 2), Fraction(1, 4)])
    assert r.status == "violated" and r.subset == (0,) and r.violation == Fraction(1, 4)
    assert separate_linking(2, [1, 1], [0, 1]).status == "feasible"
    assert separate_linking(2, [1, 1], [0, 0]).status == "trivial"


def random_point(rng, n):
    y = [Fraction(rng.randint(0, 6), 6 * n) for _ in range(n)]
    lin = sum((k + 1) * v for k, v in enumerate(y))
    # spread the linked weight over x, keeping each x in [0, 1]
    x = [Fraction(rng.randint(0, 12), 12) for _ in range(n)]
    s = sum(x)
    x = [v * lin / s for v in x] if s else [lin / n] * n
    return x, y


@given(st.integers(3, 8), st.integers(0, 10 ** 6))
def test_separation_matches_exhaustive(n, seed):
    x, y = random_point(random.Random(seed), n)
    a, b = separate_linking(n, x, y), exhaustive_separation(n, x, y)
    assert a.status == b.status
    assert a.violation == b.violation


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cover_form_equivalent(n):
    assert cover_form_equivalence_check(n)


def test_knapsack_example():
    inst = MipInstance.build([([2, 2, 3, 5], 7)], [1, 1, 1, 1])
    ext = knapsack_k_extended_description(inst)
    assert ext.p == 8 and ext.n_y == 4
    chk = check_projection_equality(ext.extended_vertices(), ext.projection_matrix(), instance_hull(inst))
    assert chk.equal, chk.certificate
