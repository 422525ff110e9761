"""Linking polyhedra for blocks of identical binary columns.

For a block of ``n`` binary variables with identical columns the value of
the block is the number of ones, so the linking polytope is

    V = conv{(x, y) in {0,1}^n x {0,1}^n : sum x = sum k y_k, sum y <= 1}.

Coordinates are ordered ``x_1..x_n, y_1..y_n``.  This module gives its
closed-form description, an O(n log n) separation routine for the
exponential subset family, and an extended description of knapsacks whose
coefficients take K distinct values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

from .exactmath import rat
from .model import MipInstance, Row
from .polyhedra import (
    DEFAULT_POINT_CAP,
    CapExceeded,
    Equation,
    Inequality,
    Polyhedron,
    canonical_polyhedron,
    extreme_points_of_integer_hull,
    vertices_of,
)

DEFAULT_SUBSET_CAP = 1 << 16


@dataclass(frozen=True)
class LinkingFacet:
    tag: str                       # "a", "sos" or "nonneg"
    subset: tuple[int, ...] = ()   # T for family a (0-based); (k,) for nonneg
    inequality: Inequality = field(default=None, compare=False)

    def descriptor(self) -> str:
        if self.tag == "a":
            return "family a: T=" + ",".join(str(j + 1) for j in self.subset)
        if self.tag == "nonneg":
            return f"nonneg y{self.subset[0] + 1}"
        return "sos"


def family_a(n: int, subset: Sequence[int]) -> Inequality:
    """``sum_{T} x_j - sum_{k<=|T|} k y_k - sum_{k>|T|} |T| y_k <= 0``."""
    t = len(subset)
    c = [0] * (2 * n)
    for j in subset:
        c[j] = 1
    for k in range(1, n + 1):
        c[n + k - 1] = -min(k, t)
    return Inequality(tuple(c), 0)


def linking_equation(n: int) -> Equation:
    return Equation(tuple([1] * n + [-k for k in range(1, n + 1)]), 0)


def _sos(n: int) -> Inequality:
    return Inequality(tuple([0] * n + [1] * n), 1)


def _nonneg(n: int, k: int) -> Inequality:
    c = [0] * (2 * n)
    c[n + k] = -1
    return Inequality(tuple(c), 0)


def iter_linking_facets(n: int) -> Iterator[LinkingFacet]:
    """Family a over nonempty proper subsets (by size, then lexicographic),
    then the packing row, then ``y_k >= 0``."""
    for size in range(1, n):
        for T in itertools.combinations(range(n), size):
            yield LinkingFacet("a", T, family_a(n, T))
    yield LinkingFacet("sos", (), _sos(n))
    for k in range(n):
        yield LinkingFacet("nonneg", (k,), _nonneg(n, k))


@dataclass(frozen=True)
class LinkingDescription:
    n: int
    equation: Equation
    facets: object      # list of LinkingFacet (explicit) or an iterator (symbolic)
    symbolic: bool

    def polyhedron(self) -> Polyhedron:
        """Canonical form of the explicit description."""
        if self.symbolic:
            raise ValueError("symbolic description; expand it explicitly first")
        return canonical_polyhedron(2 * self.n, [(self.equation.coeffs, self.equation.rhs)],
                                    [(f.inequality.coeffs, f.inequality.rhs) for f in self.facets])


def linking_facet_count(n: int) -> int:
    return (2 ** n - 2) + 1 + n


def linking_facets(n: int, mode: str = "explicit", cap: int = DEFAULT_SUBSET_CAP) -> LinkingDescription:
    """Closed-form description of V for a block of size ``n``.

    ``mode="explicit"`` materialises all ``(2^n - 2) + 1 + n`` inequalities
    and needs ``2^n - 2 <= cap``; ``mode="symbolic"`` returns a generator.
    """
    if n < 1:
        raise ValueError("block size must be at least 1")
    if mode == "symbolic":
        return LinkingDescription(n, linking_equation(n), iter_linking_facets(n), True)
    if mode != "explicit":
        raise ValueError(f"unknown mode {mode!r}")
    if 2 ** n - 2 > cap:
        raise CapExceeded(f"2^{n} - 2 subsets above cap {cap}; use symbolic mode")
    return LinkingDescription(n, linking_equation(n), list(iter_linking_facets(n)), False)


def linking_points(n: int) -> list[tuple[int, ...]]:
    """Integer points of V: every 0/1 ``x`` with the unit ``y`` of its weight."""
    out = []
    for x in itertools.product((0, 1), repeat=n):
        y = [0] * n
        s = sum(x)
        if s:
            y[s - 1] = 1
        out.append(tuple(x) + tuple(y))
    return out


# --------------------------------------------------------------- separation

@dataclass(frozen=True)
class SeparationResult:
    status: str                           # "feasible", "violated" or "trivial"
    subset: tuple[int, ...] = ()
    violation: Fraction = Fraction(0)
    constraint: str = ""

    @property
    def violated(self) -> bool:
        return self.status != "feasible"


def _check_preconditions(n, x, y) -> SeparationResult | None:
    worst = None
    gap = sum(x, Fraction(0)) - sum((k * v for k, v in zip(range(1, n + 1), y)), Fraction(0))
    if gap:
        return SeparationResult("trivial", (), abs(gap), "linking equation")
    s = sum(y, Fraction(0))
    if s > 1:
        worst = SeparationResult("trivial", (), s - 1, "sum y <= 1")
    for k, v in enumerate(y):
        if v < 0 and (worst is None or -v > worst.violation):
            worst = SeparationResult("trivial", (k,), -v, f"y{k + 1} >= 0")
    return worst


def _family_a_lhs(n, subset, x, y) -> Fraction:
    t = len(subset)
    return sum((x[j] for j in subset), Fraction(0)) - \
        sum((min(k, t) * y[k - 1] for k in range(1, n + 1)), Fraction(0))


def separate_linking(n: int, x: Sequence, y: Sequence) -> SeparationResult:
    """Most violated family-a inequality at ``(x, y)``, if any.

    The point must satisfy the linking equation, ``sum y <= 1`` and
    ``y >= 0``; otherwise the failing constraint is reported as a trivial
    violation.  Components of ``x`` are sorted in decreasing order (ties by
    index) and the prefixes of the positive part, up to size ``n - 1``, are
    evaluated.
    """
    x = [rat(v) for v in x]
    y = [rat(v) for v in y]
    if len(x) != n or len(y) != n:
        raise ValueError("point has the wrong length")
    pre = _check_preconditions(n, x, y)
    if pre is not None:
        return pre
    order = sorted(range(n), key=lambda j: (-x[j], j))
    s = sum(1 for v in x if v > 0)
    best, best_t = Fraction(0), ()
    running = Fraction(0)
    ysum_tail = sum(y, Fraction(0))
    ky_head = Fraction(0)
    for t in range(1, min(s, n - 1) + 1):
        running += x[order[t - 1]]
        ky_head += t * y[t - 1]
        ysum_tail -= y[t - 1]
        viol = running - ky_head - t * ysum_tail
        if viol > best:
            best, best_t = viol, tuple(sorted(order[:t]))
    if best > 0:
        return SeparationResult("violated", best_t, best, "family a")
    return SeparationResult("feasible")


def exhaustive_separation(n: int, x: Sequence, y: Sequence) -> SeparationResult:
    """Reference separation by enumerating all nonempty proper subsets."""
    x = [rat(v) for v in x]
    y = [rat(v) for v in y]
    pre = _check_preconditions(n, x, y)
    if pre is not None:
        return pre
    best, best_t = Fraction(0), ()
    for size in range(1, n):
        for T in itertools.combinations(range(n), size):
            v = _family_a_lhs(n, T, x, y)
            if v > best:
                best, best_t = v, T
    if best > 0:
        return SeparationResult("violated", best_t, best, "family a")
    return SeparationResult("feasible")


# ------------------------------------------------ knapsack with K classes

def cover_form(n: int, subset: Sequence[int]) -> tuple[list[int], int]:
    """``sum_{T} x_j >= sum_{k: |T|+k>n} (|T|+k-n) y_k`` as ``c.(x,y) <= 0``."""
    t = len(subset)
    c = [0] * (2 * n)
    for j in subset:
        c[j] = -1
    for k in range(1, n + 1):
        if t + k > n:
            c[n + k - 1] = t + k - n
    return c, 0


def cover_form_equivalence_check(n: int, cap: int = DEFAULT_SUBSET_CAP) -> bool:
    """Each cover-form row equals family a for the complement subset once the
    linking equation is substituted."""
    if 2 ** n - 2 > cap:
        raise CapExceeded(f"2^{n} - 2 subsets above cap {cap}")
    eq = linking_equation(n)
    for size in range(1, n):
        for T in itertools.combinations(range(n), size):
            comp = [j for j in range(n) if j not in T]
            a = family_a(n, comp)
            c, _ = cover_form(n, T)
            # a - c must be a multiple of the equation
            diff = [u - v for u, v in zip(a.coeffs, c)]
            mult = Fraction(diff[0], eq.coeffs[0])
            if any(Fraction(d) != mult * e for d, e in zip(diff, eq.coeffs)):
                return False
    return True


@dataclass(frozen=True)
class KnapsackExtended:
    """Extended description of a knapsack with K coefficient classes.

    Coordinates: ``x`` (original order), then ``y`` per class (class order,
    values 1..n_i), then ``z`` (one per vertex of the aggregated polytope).
    """
    n: int
    classes: tuple[tuple[int, ...], ...]
    class_values: tuple[Fraction, ...]
    vertices: tuple[tuple[int, ...], ...]
    equations: tuple[tuple[tuple[int, ...], int], ...]
    inequalities: tuple[tuple[tuple[int, ...], int], ...]   # z >= 0
    cover: tuple | None = None   # materialised cover rows, None when symbolic

    @property
    def symbolic(self) -> bool:
        return self.cover is None

    @property
    def n_y(self) -> int:
        return sum(len(c) for c in self.classes)

    @property
    def p(self) -> int:
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return self.n + self.n_y + self.p

    def y_index(self, i: int, k: int) -> int:
        return self.n + sum(len(c) for c in self.classes[:i]) + k - 1

    def cover_rows(self) -> Iterator[tuple[str, tuple[tuple[int, ...], int]]]:
        """Cover-form rows in the full coordinate space, with descriptors."""
        for i, cls in enumerate(self.classes):
            ni = len(cls)
            for size in range(1, ni):
                for T in itertools.combinations(range(ni), size):
                    c, r = cover_form(ni, T)
                    full = [0] * self.dim
                    for q, j in enumerate(cls):
                        full[j] = c[q]
                    for k in range(1, ni + 1):
                        full[self.y_index(i, k)] = c[ni + k - 1]
                    desc = f"class {i + 1} T=" + ",".join(str(cls[q] + 1) for q in T)
                    yield desc, (tuple(full), r)

    def all_inequalities(self) -> list[tuple[tuple[int, ...], int]]:
        cover = self.cover if self.cover is not None else [row for _, row in self.cover_rows()]
        return list(self.inequalities) + list(cover)

    def polyhedron(self) -> Polyhedron:
        return canonical_polyhedron(self.dim, self.equations, self.all_inequalities())

    def extended_vertices(self) -> list[tuple[Fraction, ...]]:
        return vertices_of(self.dim, self.all_inequalities(), self.equations)

    def projection_matrix(self) -> list[list[int]]:
        return [[int(j == k) for j in range(self.dim)] for k in range(self.n)]


def knapsack_classes(inst: MipInstance) -> tuple[list[tuple[int, ...]], list[Fraction]]:
    """Index classes by coefficient value (in order of first appearance)."""
    row = inst.rows[0]
    classes: dict[Fraction, list[int]] = {}
    for j, a in enumerate(row.int_coeffs):
        classes.setdefault(a, []).append(j)
    vals = list(classes)
    return [tuple(classes[v]) for v in vals], vals


def knapsack_k_extended_description(inst: MipInstance, classes: Sequence[Sequence[int]] | None = None,
                                    explicit: bool = True, cap: int = DEFAULT_POINT_CAP) -> KnapsackExtended:
    """Extended complete description of a single-row 0/1 knapsack.

    The aggregated polytope over ``y`` is given by its vertex list
    ``v^1..v^p``; the system is ``y = sum v^j z_j``, ``sum z = 1``,
    ``z >= 0``, the per-class linking equations and the cover-form rows for
    every nonempty proper subset of every class.  With ``explicit=False``
    the cover rows are left to ``cover_rows()``.
    """
    if len(inst.rows) != 1 or inst.rows[0].sense != "<=" or inst.n_cont or not inst.is_binary():
        raise ValueError("expected a single <= row over binary variables")
    row = inst.rows[0]
    if classes is None:
        classes, vals = knapsack_classes(inst)
    else:
        classes = [tuple(c) for c in classes]
        vals = []
        for c in classes:
            cs = {row.int_coeffs[j] for j in c}
            if len(cs) != 1:
                raise ValueError("class with non-identical coefficients")
            vals.append(cs.pop())
        if sorted(j for c in classes for j in c) != list(range(inst.n_int)):
            raise ValueError("classes must partition the variables")
    size = 1
    for c in classes:
        size *= len(c) + 1
    if size > cap:
        raise CapExceeded(f"aggregated box has {size} points, above --cap-points {cap}")
    # aggregated polytope over y: class i takes value k_i in 0..n_i
    ny = sum(len(c) for c in classes)
    agg_rows = [Row(tuple(v * k for v, c in zip(vals, classes) for k in range(1, len(c) + 1)), (), row.rhs, "<=")]
    off = 0
    for c in classes:
        a = [0] * ny
        for k in range(len(c)):
            a[off + k] = 1
        agg_rows.append(Row(tuple(Fraction(v) for v in a), (), Fraction(1), "<="))
        off += len(c)
    agg = MipInstance(ny, (1,) * ny, tuple(agg_rows))
    verts = tuple(extreme_points_of_integer_hull(agg, cap))
    n, p = inst.n_int, len(verts)
    dim = n + ny + p
    eqs = []
    for q in range(ny):                     # y_q - sum v^j_q z_j = 0
        c = [0] * dim
        c[n + q] = 1
        for j, v in enumerate(verts):
            c[n + ny + j] = -v[q]
        eqs.append((tuple(c), 0))
    eqs.append((tuple([0] * (n + ny) + [1] * p), 1))
    off = 0
    for cls in classes:                     # linking equations
        c = [0] * dim
        for j in cls:
            c[j] = 1
        for k in range(1, len(cls) + 1):
            c[n + off + k - 1] = -k
        eqs.append((tuple(c), 0))
        off += len(cls)
    ineqs = []
    for j in range(p):
        c = [0] * dim
        c[n + ny + j] = -1
        ineqs.append((tuple(c), 0))
    ext = KnapsackExtended(n, tuple(classes), tuple(Fraction(v) for v in vals), verts,
                           tuple(eqs), tuple(ineqs))
    if explicit:
        ext = replace(ext, cover=tuple(row for _, row in ext.cover_rows()))
    return ext
