import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from valuedisj import exactmath as em
from valuedisj.model import MipInstance
from valuedisj.polyhedra import (
    CapExceeded, canonical_polyhedron, certify_hull, check_projection_equality, coordinate_projection,
    count_facets, enumerate_feasible_points, extreme_points_of_integer_hull, hull_facets,
    instance_hull, polyhedron_vertices, vertices_of,
)
from conftest import fixture


def brute_points(inst):
    """Independent enumeration straight from the row definitions."""
    return [x for x in itertools.product(*(range(u + 1) for u in inst.upper_bounds))
            if inst.is_feasible_point(x)]


def brute_facets(points):
    """Facets of a full-dimensional point set by trying every hyperplane
    through d affinely independent points."""
    pts = sorted(set(tuple(p) for p in points))
    d = len(pts[0])
    out = set()
    for sub in itertools.combinations(pts, d):
        rows = [list(map(Fraction, p)) + [Fraction(-1)] for p in sub]
        null = em.nullspace(rows, d + 1)
        if len(null) != 1:
            continue
        v = null[0]
        a, b = v[:d], v[d]
        if not any(a):
            continue
        vals = [em.dot(a, p) - b for p in pts]
        if all(x <= 0 for x in vals) or all(x >= 0 for x in vals):
            sign = 1 if all(x <= 0 for x in vals) else -1
            tight = [p for p, x in zip(pts, vals) if x == 0]
            diffs = [[s - t for s, t in zip(p, tight[0])] for p in tight[1:]]
            if em.rank(diffs) == d - 1:
                out.add(tuple(em.integer_scale([sign * c for c in a] + [sign * b])))
    return out


def test_example1_point_count(ex1):
    pts = enumerate_feasible_points(ex1)
    assert len(pts) == len(brute_points(ex1)) == 237


def test_example1_facets(ex1):
    poly = instance_hull(ex1)
    assert count_facets(poly)[1] == 13
    assert certify_hull(enumerate_feasible_points(ex1), poly) is None


def test_product_reformulation_facets():
    poly = instance_hull(fixture("ex1_product.mip"))
    assert count_facets(poly)[1] == 9


def test_example3_total_facets(ex3):
    poly = instance_hull(ex3)
    assert count_facets(poly)[0] == 14


def test_example5_facets(ex5):
    assert count_facets(instance_hull(ex5))[1] == 77


def test_equation_detection():
    pts = [(0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 1, 0), (1, 1, 0, 1)]
    poly = hull_facets(pts)
    assert [(e.coeffs, e.rhs) for e in poly.equations] == [((1, 1, -1, -2), 0)]
    assert certify_hull(pts, poly) is None


def test_empty_and_single_point():
    inst = MipInstance.build([([1, 1], -1)], [1, 1])
    assert len(enumerate_feasible_points(inst)) == 0
    assert instance_hull(inst) is None
    poly = hull_facets([(1, 2)])
    assert len(poly.equations) == 2 and poly.facets == ()


def test_caps():
    inst = MipInstance.build([], [1] * 10)
    with pytest.raises(CapExceeded):
        enumerate_feasible_points(inst, cap=100)
    with pytest.raises(CapExceeded):
        hull_facets(np.eye(4, dtype=np.int64), max_dim=3)


def test_bound_rewrite_modulo_equations():
    # on x1 + x2 = 1, the row x2 <= 1 equals -x1 <= 0
    poly = canonical_polyhedron(2, [([1, 1], 1)], [([0, 1], 1)])
    f = poly.facets[0]
    assert f.kind == "bound" and f.coeffs == (-1, 0) and f.rhs == 0


def test_vertices_of_square():
    ineqs = [([1, 0], 1), ([0, 1], 1), ([-1, 0], 0), ([0, -1], 0)]
    assert sorted(vertices_of(2, ineqs)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_vertices_with_fractional_point():
    ineqs = [([2, 2], 1), ([-1, 0], 0), ([0, -1], 0)]
    assert sorted(vertices_of(2, ineqs)) == [(0, 0), (0, Fraction(1, 2)), (Fraction(1, 2), 0)]


def test_extreme_points_general_integer():
    inst = MipInstance.build([], [2, 2])
    assert sorted(extreme_points_of_integer_hull(inst)) == [(0, 0), (0, 2), (2, 0), (2, 2)]


def test_projection_check():
    orig = hull_facets([(0,), (1,)])
    assert check_projection_equality([(0, 1), (1, 0)], coordinate_projection(2, [0]), orig)
    bad = check_projection_equality([(0, 1), (2, 0)], coordinate_projection(2, [0]), orig)
    assert not bad and "facet" in bad.certificate


point_sets = st.lists(st.tuples(*[st.integers(0, 2)] * 3), min_size=1, max_size=14)


@given(point_sets)
def test_hull_contains_points_and_certifies(points):
    poly = hull_facets(points)
    assert all(poly.contains(p) for p in points)
    assert certify_hull(points, poly) is None


@given(point_sets)
def test_hull_vertices_are_input_points(points):
    poly = hull_facets(points)
    verts = polyhedron_vertices(poly)
    assert set(verts) <= {tuple(Fraction(v) for v in p) for p in points}
    assert hull_facets([tuple(int(v) for v in p) for p in verts]).same_as(poly)


@given(st.lists(st.tuples(*[st.integers(0, 2)] * 3), min_size=4, max_size=12))
def test_hull_matches_brute_force_facets(points):
    if em.affine_hull(points):
        return
    poly = hull_facets(points)
    ours = {tuple(f.coeffs) + (f.rhs,) for f in poly.facets}
    assert ours == brute_facets(points)


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3), st.integers(-3, 6),
       st.sampled_from(["<=", ">=", "="]))
def test_enumeration_matches_brute_force(a, b, sense):
    inst = MipInstance.build([(a, b, sense)], [1, 2, 1])
    got = [tuple(int(v) for v in p) for p in enumerate_feasible_points(inst)]
    assert got == brute_points(inst)
