"""Exact LP and a small branch-and-bound engine.

The LP solver is a bounded-variable primal simplex over ``Fraction`` with
Bland's rule, so it terminates and is deterministic.  Integer variables
live in their boxes, continuous variables are nonnegative and unbounded
above.  Branch and bound is depth-first; of two children the one with the
better LP bound is explored first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .branching import sign_relaxation, sos_branch_subproblems
from .exactmath import rat
from .model import MipInstance, Objective, Row, objective_offset
from .valdis import build_extended_formulation

INF = None  # marks an infinite upper bound


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LpResult:
    status: str                                 # optimal | infeasible | unbounded
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None   # (ints, conts)
    duals: tuple[Fraction, ...] | None = None   # one per row
    basis: tuple[int, ...] | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# ------------------------------------------------------------------ simplex

class _Tableau:
    """``B^-1 [A | I_art]`` with basic values; columns ``0..N-1`` structural."""

    def __init__(self, A, b, lo, up):
        self.m = len(A)
        self.N = len(lo)
        self.lo, self.up = list(lo), list(up)
        self.x = list(lo)                     # nonbasic values; basic entries overwritten
        resid = [bi - sum((a * v for a, v in zip(row, self.x) if a and v), Fraction(0))
                 for row, bi in zip(A, b)]
        self.T = []
        for i, row in enumerate(A):
            sgn = 1 if resid[i] >= 0 else -1
            art = [Fraction(0)] * self.m
            art[i] = Fraction(1)
            self.T.append([a * sgn for a in row] + art)
        self.basis = [self.N + i for i in range(self.m)]
        self.x += [abs(r) for r in resid]
        self.lo += [Fraction(0)] * self.m
        self.up += [INF] * self.m
        self.sign = [1 if r >= 0 else -1 for r in resid]
        self.pivots = 0

    def width(self):
        return self.N + self.m

    def reduced(self, c):
        cb = [c[j] for j in self.basis]
        d = list(c)
        for i, row in enumerate(self.T):
            if cb[i]:
                for j, a in enumerate(row):
                    if a:
                        d[j] -= cb[i] * a
        return d

    def pivot(self, r, q):
        row = self.T[r]
        p = row[q]
        row[:] = [a / p for a in row]
        for i, other in enumerate(self.T):
            if i != r and other[q]:
                f = other[q]
                other[:] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = q
        self.pivots += 1

    def run(self, c, allowed):
        """Maximise ``c.x`` by Bland's rule over the ``allowed`` columns."""
        basic = set(self.basis)
        while True:
            d = self.reduced(c)
            q, up_dir = None, True
            for j in range(self.width()):
                if j in basic or not allowed[j]:
                    continue
                at_upper = self.up[j] is not INF and self.x[j] == self.up[j]
                if d[j] > 0 and not at_upper:
                    q, up_dir = j, True
                    break
                if d[j] < 0 and self.x[j] > self.lo[j]:
                    q, up_dir = j, False
                    break
            if q is None:
                return "optimal"
            s = 1 if up_dir else -1
            best_t, leave = None, None        # leave = (var index, row) or None for a bound flip
            if self.up[q] is not INF:
                best_t = self.up[q] - self.lo[q]
            for i, row in enumerate(self.T):
                a = row[q] * s
                if not a:
                    continue
                bv = self.basis[i]
                if a > 0:
                    t = (self.x[bv] - self.lo[bv]) / a
                elif self.up[bv] is not INF:
                    t = (self.up[bv] - self.x[bv]) / -a
                else:
                    continue
                if best_t is None or t < best_t or (t == best_t and leave is not None and bv < leave[0]):
                    best_t, leave = t, (bv, i)
            if best_t is None:
                return "unbounded"
            for i, row in enumerate(self.T):
                if row[q]:
                    self.x[self.basis[i]] -= s * best_t * row[q]
            self.x[q] += s * best_t
            if leave is not None:
                bv, r = leave
                # snap the leaving variable onto the bound it reached
                a = self.T[r][q] * s
                self.x[bv] = self.lo[bv] if a > 0 else self.up[bv]
                self.pivot(r, q)
                basic.discard(bv)
                basic.add(q)


def _standard_form(inst: MipInstance, lo, up):
    """Rows as equations over (ints, conts, slacks) with variable bounds."""
    n, d = inst.n_int, inst.n_cont
    rows, b = [], []
    slack_cols = []
    for r in inst.rows:
        rows.append(list(r.int_coeffs) + list(r.cont_coeffs))
        b.append(r.rhs)
        slack_cols.append({"<=": 1, ">=": -1, "=": 0}[r.sense])
    ns = sum(1 for s in slack_cols if s)
    A = []
    k = 0
    for row, s in zip(rows, slack_cols):
        ext = [Fraction(0)] * ns
        if s:
            ext[k] = Fraction(s)
            k += 1
        A.append(row + ext)
    L = list(lo) + [Fraction(0)] * d + [Fraction(0)] * ns
    U = list(up) + [INF] * d + [INF] * ns
    return A, b, L, U


def simplex_solve(inst: MipInstance, objective: Objective | None = None,
                  lower: Sequence | None = None, upper: Sequence | None = None) -> LpResult:
    """LP relaxation of ``inst`` with optional tightened integer bounds."""
    obj = objective or inst.objective
    if obj is None:
        obj = Objective("max", (Fraction(0),) * inst.n_vars)
    lo = [rat(v) for v in lower] if lower is not None else [Fraction(0)] * inst.n_int
    up = [rat(v) for v in upper] if upper is not None else [Fraction(u) for u in inst.upper_bounds]
    if any(a > b for a, b in zip(lo, up)):
        return LpResult("infeasible")
    A, b, L, U = _standard_form(inst, lo, up)
    nv = inst.n_vars
    sgn = 1 if obj.sense == "max" else -1
    c = [sgn * v for v in obj.coeffs] + [Fraction(0)] * (len(L) - nv)
    tab = _Tableau(A, b, L, U)
    W = tab.width()
    if tab.m:
        phase1 = [Fraction(0)] * tab.N + [Fraction(-1)] * tab.m
        tab.run(phase1, [True] * W)
        if any(tab.x[tab.N + i] for i in range(tab.m)):
            return LpResult("infeasible", pivots=tab.pivots)
        _drive_out_artificials(tab)
    allowed = [True] * tab.N + [False] * tab.m
    status = tab.run(c + [Fraction(0)] * tab.m, allowed)
    if status == "unbounded":
        return LpResult("unbounded", pivots=tab.pivots)
    x = tab.x[:tab.N]
    value = sum((cj * xj for cj, xj in zip(c, x)), Fraction(0)) * sgn
    duals = _duals(A, tab, c)
    return LpResult("optimal", value, tuple(x[:nv]), tuple(d * sgn for d in duals),
                    tuple(tab.basis), tab.pivots)


def _drive_out_artificials(tab: _Tableau) -> None:
    for r in range(tab.m):
        if tab.basis[r] >= tab.N:
            for j in range(tab.N):
                if tab.T[r][j] and j not in tab.basis:
                    # degenerate pivot: the artificial sits at 0, j keeps its value
                    tab.pivot(r, j)
                    break


def _duals(A, tab: _Tableau, c) -> list[Fraction]:
    """``y`` with ``y B = c_B`` read off the artificial columns of the tableau."""
    m = tab.m
    cb = [c[j] if j < tab.N else Fraction(0) for j in tab.basis]
    y = []
    for i in range(m):
        # column of artificial i in the tableau is B^-1 (sign_i e_i)
        col = [tab.T[r][tab.N + i] for r in range(m)]
        y.append(sum((cbr * v for cbr, v in zip(cb, col)), Fraction(0)) * tab.sign[i])
    return y


def verify_lp_certificate(inst: MipInstance, res: LpResult, objective: Objective | None = None,
                          lower: Sequence | None = None, upper: Sequence | None = None) -> bool:
    """Exact optimality check from the duals (bounded-variable KKT)."""
    if not res.optimal:
        return False
    obj = objective or inst.objective or Objective("max", (Fraction(0),) * inst.n_vars)
    sgn = 1 if obj.sense == "max" else -1
    lo = [rat(v) for v in lower] if lower is not None else [Fraction(0)] * inst.n_int
    up = [rat(v) for v in upper] if upper is not None else [Fraction(u) for u in inst.upper_bounds]
    A, b, L, U = _standard_form(inst, lo, up)
    x = list(res.point)
    full = list(x)
    for i, r in enumerate(inst.rows):
        if r.sense != "=":
            lhs = sum((a * v for a, v in zip(A[i], x)), Fraction(0))
            full.append(b[i] - lhs if r.sense == "<=" else lhs - b[i])
    for row, bi in zip(A, b):
        if sum((a * v for a, v in zip(row, full)), Fraction(0)) != bi:
            return False
    for j, v in enumerate(full):
        if v < L[j] or (U[j] is not INF and v > U[j]):
            return False
    y = [sgn * v for v in res.duals]
    c = [sgn * v for v in obj.coeffs] + [Fraction(0)] * (len(L) - inst.n_vars)
    for j in range(len(L)):
        dj = c[j] - sum((yi * row[j] for yi, row in zip(y, A)), Fraction(0))
        if dj > 0 and not (U[j] is not INF and full[j] == U[j]):
            return False
        if dj < 0 and full[j] != L[j]:
            return False
    value = sum((cj * v for cj, v in zip(c, full)), Fraction(0)) * sgn
    return value == res.value


# ------------------------------------------------------- branch and bound

@dataclass
class BnbStats:
    nodes: int = 0
    incumbents: int = 0
    best: Fraction | None = None
    lp_pivots: int = 0
    per_subproblem: list = field(default_factory=list)


@dataclass(frozen=True)
class BnbResult:
    status: str                                  # optimal | infeasible
    value: Fraction | None
    point: tuple[Fraction, ...] | None
    stats: BnbStats


def _most_fractional(point, n_int):
    best, best_j = None, None
    for j in range(n_int):
        f = point[j] - (point[j].numerator // point[j].denominator)
        if f:
            dist = abs(f - Fraction(1, 2))
            if best is None or dist < best:
                best, best_j = dist, j
    return best_j


def branch_and_bound(inst: MipInstance, rule: str = "variable", sos_vars: Sequence[int] | None = None,
                     incumbent=None, max_nodes: int | None = None) -> BnbResult:
    """Exact optimum of ``inst``.

    ``rule="sos"`` branches at the root on the value variables ``sos_vars``
    (all zero, then each one set to one); below the root, and for
    ``rule="variable"``, the most fractional integer variable is used.
    ``incumbent`` is a known objective value; only strictly better
    solutions are accepted, so the result may carry no point.
    """
    obj = inst.objective or Objective("max", (Fraction(0),) * inst.n_vars)
    sgn = 1 if obj.sense == "max" else -1
    stats = BnbStats()
    best = None if incumbent is None else sgn * rat(incumbent)
    best_point = None
    n = inst.n_int

    def lp(lo, up):
        res = simplex_solve(inst, obj, lo, up)
        stats.nodes += 1
        stats.lp_pivots += res.pivots
        if res.status == "unbounded":
            raise SolverError("LP relaxation is unbounded")
        return res

    def children(lo, up, res, root):
        if root and rule == "sos" and sos_vars:
            kids = []
            lo0, up0 = list(lo), list(up)
            for j in sos_vars:
                up0[j] = Fraction(0)
            kids.append((lo0, up0))
            for k in sos_vars:
                l2, u2 = list(lo), list(up)
                for j in sos_vars:
                    if j == k:
                        l2[j] = Fraction(1)
                    else:
                        u2[j] = Fraction(0)
                kids.append((l2, u2))
            return kids
        j = _most_fractional(res.point, n)
        v = res.point[j]
        fl = Fraction(v.numerator // v.denominator)
        l1, u1 = list(lo), list(up)
        u1[j] = fl
        l2, u2 = list(lo), list(up)
        l2[j] = fl + 1
        return [(l1, u1), (l2, u2)]

    lo0 = [Fraction(0)] * n
    up0 = [Fraction(u) for u in inst.upper_bounds]
    root = lp(lo0, up0)
    stack = [(lo0, up0, root, True)]
    while stack:
        lo, up, res, is_root = stack.pop()
        if not res.optimal:
            continue
        bound = sgn * res.value
        if best is not None and bound <= best:
            continue
        integral = all(res.point[j].denominator == 1 for j in range(n))
        if integral and not (is_root and rule == "sos" and sos_vars):
            best, best_point = bound, res.point
            stats.incumbents += 1
            continue
        if max_nodes is not None and stats.nodes >= max_nodes:
            raise SolverError(f"node limit {max_nodes} reached")
        evaluated = []
        for l, u in children(lo, up, res, is_root):
            r = lp(l, u)
            if r.optimal:
                evaluated.append((l, u, r))
        # depth-first; the best bound child is popped first, ties keep order
        order = sorted(range(len(evaluated)), key=lambda i: (sgn * evaluated[i][2].value, -i))
        for i in order:
            l, u, r = evaluated[i]
            stack.append((l, u, r, False))
    stats.best = None if best is None else sgn * best
    if best is None:
        return BnbResult("infeasible", None, None, stats)
    return BnbResult("optimal", sgn * best, best_point, stats)


def brute_force_optimum(inst: MipInstance) -> tuple[str, Fraction | None]:
    """Enumeration oracle for pure integer instances."""
    from .polyhedra import enumerate_feasible_points
    if inst.n_cont:
        raise ValueError("brute force needs a pure integer instance")
    obj = inst.objective or Objective("max", (Fraction(0),) * inst.n_int)
    sgn = 1 if obj.sense == "max" else -1
    best = None
    for x in enumerate_feasible_points(inst).tolist():
        v = sum((c * xi for c, xi in zip(obj.coeffs, x) if xi), Fraction(0))
        if best is None or sgn * v > sgn * best:
            best = v
    return ("infeasible", None) if best is None else ("optimal", best)


# ----------------------------------------------------------- market split

def market_split_feasibility(inst: MipInstance) -> MipInstance:
    """``a_i x + s+_i - s-_i = b_i`` with nonnegative slacks, minimising
    their sum; the optimum is 0 exactly when the instance is feasible."""
    if inst.n_cont:
        raise ValueError("expected a pure integer instance")
    m = len(inst.rows)
    rows = []
    for i, r in enumerate(inst.rows):
        g = [Fraction(0)] * (2 * m)
        g[2 * i], g[2 * i + 1] = Fraction(1), Fraction(-1)
        rows.append(Row(r.int_coeffs, tuple(g), r.rhs, "="))
    obj = Objective("min", (Fraction(0),) * inst.n_int + (Fraction(1),) * (2 * m))
    return MipInstance(inst.n_int, inst.upper_bounds, tuple(rows), 2 * m, obj)


# ------------------------------------------------ value-disjunction workflow

@dataclass(frozen=True)
class WorkflowResult:
    status: str
    value: Fraction | None
    block: tuple[int, ...]
    f_values: tuple[int, ...]
    labels: tuple[str, ...]
    stats: BnbStats

    @property
    def total_nodes(self) -> int:
        return self.stats.nodes


def default_block(row_coeffs: Sequence, f_values: Sequence[int], cap: int = 6) -> tuple[int, ...]:
    """Columns with ``f != 0``, largest ``|a|`` first (ties by index)."""
    cols = [j for j, f in enumerate(f_values) if f]
    cols.sort(key=lambda j: (-abs(rat(row_coeffs[j])), j))
    return tuple(sorted(cols[:cap]))


def value_disjunction_workflow(inst: MipInstance, dense_row: int = 0, lower=None, upper=None, rhs=None,
                               block: Sequence[int] | None = None, block_cap: int = 6) -> WorkflowResult:
    """Relax a dense row by sign thresholds, add the relaxation, build a
    value disjunction over it and solve the SOS subproblems in turn, each
    starting from the best value found so far.

    Defaults: ``U`` half the largest ``|a_j|`` of the row, ``L = -U`` and
    ``M`` the number of ``+1`` entries (so the added row is redundant for
    binary variables).
    """
    from .branching import default_thresholds
    row = inst.rows[dense_row].int_coeffs
    if lower is None or upper is None:
        lo, up = default_thresholds(row)
        lower = lo if lower is None else lower
        upper = up if upper is None else upper
    relax = sign_relaxation(row, lower, upper, 0 if rhs is None else rhs, dense_row)
    if rhs is None:
        bound = sum(u for f, u in zip(relax.f_values, inst.upper_bounds) if f == 1)
        relax = sign_relaxation(row, lower, upper, bound, dense_row)
    if block is None:
        block = default_block(row, relax.f_values, block_cap)
    block = tuple(block)
    obj = inst.objective or Objective("max", (Fraction(0),) * inst.n_vars)
    sgn = 1 if obj.sense == "max" else -1
    stats = BnbStats()
    if len(block) < 2 or not any(relax.f_values[j] for j in block):
        res = branch_and_bound(inst)
        stats.nodes = res.stats.nodes
        stats.lp_pivots = res.stats.lp_pivots
        stats.per_subproblem.append(("plain", res.stats.nodes))
        stats.best = res.value
        return WorkflowResult(res.status, res.value, block, relax.f_values, ("plain",), stats)
    aug = inst.add_row(relax.f_values, relax.rhs, "<=")
    ext = build_extended_formulation(aug, [block], target_rows=[len(aug.rows) - 1])
    subs = sos_branch_subproblems(ext, 0)
    best = None
    labels = []
    for fix, sub in subs:
        off = objective_offset(ext.instance, fix)
        inc = None if best is None else best - off
        res = branch_and_bound(sub, incumbent=inc)
        stats.nodes += res.stats.nodes
        stats.lp_pivots += res.stats.lp_pivots
        stats.per_subproblem.append((fix.label, res.stats.nodes))
        labels.append(fix.label)
        if res.status == "optimal" and res.point is not None:
            v = res.value + off
            if best is None or sgn * v > sgn * best:
                best = v
                stats.incumbents += 1
    stats.best = best
    status = "optimal" if best is not None else "infeasible"
    return WorkflowResult(status, best, block, relax.f_values, tuple(labels), stats)
