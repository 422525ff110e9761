import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from valuedisj.model import MipInstance, generate_market_split
from valuedisj.polyhedra import vertices_of
from valuedisj.solver import (
    branch_and_bound, brute_force_optimum, market_split_feasibility, simplex_solve,
    value_disjunction_workflow, verify_lp_certificate,
)


def random_instance(seed, n_max=8):
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    rows = []
    for _ in range(rng.randint(1, 3)):
        a = [rng.randint(-9, 9) for _ in range(n)]
        sense = rng.choice(["<=", ">=", "<="])
        rows.append((a, rng.randint(-5, 15), sense))
    obj = (rng.choice(["max", "min"]), [rng.randint(-9, 9) for _ in range(n)])
    return MipInstance.build(rows, [1] * n, objective=obj)


def lp_oracle(inst):
    """Best objective over the exact vertices of the LP relaxation."""
    n = inst.n_int
    ineqs, eqs = [], []
    for r in inst.rows:
        if r.sense == "<=":
            ineqs.append((r.int_coeffs, r.rhs))
        elif r.sense == ">=":
            ineqs.append(([-v for v in r.int_coeffs], -r.rhs))
        else:
            eqs.append((r.int_coeffs, r.rhs))
    for j in range(n):
        e = [0] * n
        e[j] = 1
        ineqs.append((e, inst.upper_bounds[j]))
        ineqs.append(([-v for v in e], 0))
    try:
        verts = vertices_of(n, ineqs, eqs)
    except ValueError:
        return None
    if not verts:
        return None
    vals = [sum(c * v for c, v in zip(inst.objective.coeffs, p)) for p in verts]
    return max(vals) if inst.objective.sense == "max" else min(vals)


def test_lp_example(ex1):
    inst = MipInstance.build([(r.int_coeffs, r.rhs) for r in ex1.rows], ex1.upper_bounds,
                             objective=("max", [1] * 8))
    res = simplex_solve(inst)
    assert res.optimal and res.value == 8
    assert verify_lp_certificate(inst, res) is True


def test_lp_fractional_optimum():
    inst = MipInstance.build([([2, 2], 3)], [1, 1], objective=("max", [1, 1]))
    res = simplex_solve(inst)
    assert res.value == Fraction(3, 2)


def test_lp_infeasible():
    inst = MipInstance.build([([1, 1], 3, ">=")], [1, 1], objective=("max", [1, 1]))
    assert simplex_solve(inst).status == "infeasible"


@settings(max_examples=40)
@given(st.integers(0, 10 ** 9))
def test_lp_matches_vertex_oracle(seed):
    inst = random_instance(seed, n_max=5)
    want = lp_oracle(inst)
    res = simplex_solve(inst)
    if want is None:
        assert res.status == "infeasible"
    else:
        assert res.optimal and res.value == want
        assert verify_lp_certificate(inst, res) is True


@settings(max_examples=30)
@given(st.integers(0, 10 ** 9))
def test_bnb_matches_brute_force(seed):
    inst = random_instance(seed)
    status, value = brute_force_optimum(inst)
    res = branch_and_bound(inst)
    assert res.status == status and res.value == value
    if value is not None:
        assert inst.is_feasible_point(tuple(int(v) for v in res.point))


def test_market_split_workflow_small():
    inst = generate_market_split(1, 6, 3)
    feas = market_split_feasibility(inst)
    plain = branch_and_bound(feas)
    wf = value_disjunction_workflow(feas)
    assert wf.value == plain.value
    assert wf.stats.nodes > 0
