"""Desk-scale exact polyhedral core.

Feasible points are enumerated by brute force over the box; complete facet
descriptions are computed by double description on the homogenised points.
All inequalities are stored canonically: reduced modulo the affine hull,
integer coefficients with gcd 1, ``coeffs . x <= rhs``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .. import exactmath
from ..model import MipInstance
from . import _kernels
from .dd import extreme_rays, greedy_row_basis

DEFAULT_POINT_CAP = 1 << 24
MAX_HULL_DIM = 24


class CapExceeded(RuntimeError):
    """An enumeration or dimension cap was hit; the message names the cap."""


@dataclass(frozen=True, order=True)
class Inequality:
    coeffs: tuple[int, ...]
    rhs: int
    kind: str = field(default="facet", compare=False)

    def format(self) -> str:
        return " ".join(str(c) for c in self.coeffs) + f" <= {self.rhs}"

    def slack(self, point: Sequence) -> Fraction:
        return self.rhs - sum((Fraction(c) * v for c, v in zip(self.coeffs, point)), Fraction(0))


@dataclass(frozen=True)
class Equation:
    coeffs: tuple[int, ...]
    rhs: int

    def format(self) -> str:
        return "=: " + " ".join(str(c) for c in self.coeffs) + f" = {self.rhs}"

    def residual(self, point: Sequence) -> Fraction:
        return sum((Fraction(c) * v for c, v in zip(self.coeffs, point)), Fraction(0)) - self.rhs


@dataclass(frozen=True)
class Polyhedron:
    dim: int
    equations: tuple[Equation, ...]
    facets: tuple[Inequality, ...]
    vertices: tuple[tuple, ...] | None = None

    @property
    def affine_dim(self) -> int:
        return self.dim - len(self.equations)

    def contains(self, point: Sequence) -> bool:
        return all(e.residual(point) == 0 for e in self.equations) and \
            all(f.slack(point) >= 0 for f in self.facets)

    def lines(self) -> list[str]:
        return [e.format() for e in self.equations] + [f.format() for f in self.facets]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "equations": [{"coeffs": list(e.coeffs), "rhs": e.rhs} for e in self.equations],
            "facets": [{"coeffs": list(f.coeffs), "rhs": f.rhs, "kind": f.kind} for f in self.facets],
            "counts": dict(zip(("total", "nontrivial", "equations"), count_facets(self))),
        }

    def same_as(self, other: "Polyhedron") -> bool:
        return self.dim == other.dim and self.equations == other.equations and \
            set(self.facets) == set(other.facets)


# -------------------------------------------------------------- canonical form

class Canonicalizer:
    """Reduces inequalities modulo a fixed system of equations.

    The equations are brought to reduced row-echelon form; an inequality is
    then made zero on the pivot columns, scaled to primitive integers and,
    when it is equivalent to a single-variable bound, rewritten as that bound
    (lowest variable index wins).
    """

    def __init__(self, equations: Iterable, dim: int):
        self.dim = dim
        rows = [list(map(Fraction, c)) + [Fraction(b)] for c, b in equations]
        r, R, piv = exactmath.row_reduce(rows) if rows else (0, [], [])
        self.rref = [row for row in R[:r]]
        self.pivots = piv
        eqs = []
        for row in self.rref:
            c, b = exactmath.canonical_equation(row[:-1], row[-1])
            eqs.append(Equation(c, b))
        self.equations = tuple(eqs)
        # non-pivot part of each equation, for the single-variable test
        self._tails = []
        pivset = set(piv)
        for row in self.rref:
            self._tails.append([row[j] if j not in pivset else Fraction(0) for j in range(dim)])

    def reduce(self, coeffs: Sequence, rhs) -> tuple[list[Fraction], Fraction]:
        c = [Fraction(v) for v in coeffs]
        b = Fraction(rhs)
        for p, row in zip(self.pivots, self.rref):
            f = c[p]
            if f:
                c = [a - f * e for a, e in zip(c, row[:-1])]
                b -= f * row[-1]
        return c, b

    def implied(self, coeffs: Sequence, rhs) -> bool:
        """True when the row vanishes modulo the equations and holds as
        ``0 <= b``; raises when it reduces to a contradiction."""
        c, b = self.reduce(coeffs, rhs)
        if any(c):
            return False
        if b < 0:
            raise ValueError("inequality contradicts the equations")
        return True

    def canonical(self, coeffs: Sequence, rhs) -> Inequality:
        c, b = self.reduce(coeffs, rhs)
        support = [j for j, v in enumerate(c) if v != 0]
        if not support:
            raise ValueError("inequality is implied by the equations")
        candidates = []
        if len(support) == 1:
            candidates.append((support[0], c, b))
        for p, row, tail in zip(self.pivots, self.rref, self._tails):
            # c == mu * tail  =>  c ~ -mu * x_p <= b - mu * beta
            j0 = support[0]
            if tail[j0] == 0:
                continue
            mu = c[j0] / tail[j0]
            if all(cv == mu * tv for cv, tv in zip(c, tail)):
                rep = [Fraction(0)] * self.dim
                rep[p] = -mu
                candidates.append((p, rep, b - mu * row[-1]))
        if candidates:
            _, c, b = min(candidates, key=lambda t: t[0])
            kind = "bound"
        else:
            kind = "facet"
        vec = exactmath.integer_scale(list(c) + [b])
        # integer_scale divides by a positive gcd, so the sense is preserved
        return Inequality(tuple(vec[:-1]), vec[-1], kind)


def canonical_polyhedron(dim: int, equations, inequalities, vertices=None) -> Polyhedron:
    canon = Canonicalizer(equations, dim)
    facets = sorted({canon.canonical(c, b) for c, b in inequalities if not canon.implied(c, b)})
    return Polyhedron(dim, canon.equations, tuple(facets), vertices)


def format_facets(poly: Polyhedron) -> str:
    return "".join(line + "\n" for line in poly.lines())


def polyhedron_json(poly: Polyhedron) -> str:
    return json.dumps(poly.to_json(), sort_keys=True)


# -------------------------------------------------------------- enumeration

def _integer_rows(inst: MipInstance):
    A, b, eq = [], [], []
    for r in inst.rows:
        if any(r.cont_coeffs):
            raise ValueError("enumeration needs an instance without continuous columns")
        vec = exactmath.integer_scale(list(r.int_coeffs) + [r.rhs])
        a, rhs = vec[:-1], vec[-1]
        if r.sense == ">=":
            a, rhs = [-v for v in a], -rhs
        A.append(a)
        b.append(rhs)
        eq.append(r.sense == "=")
    return A, b, eq


def enumerate_feasible_points(inst: MipInstance, cap: int = DEFAULT_POINT_CAP) -> np.ndarray:
    """Integer points of the box satisfying every row, lexicographic order.

    Returns an int64 array of shape (count, n_int).
    """
    if inst.n_cont:
        raise ValueError("point enumeration requires n_cont == 0")
    size = inst.box_size()
    if size > cap:
        raise CapExceeded(f"box has {size} points, above --cap-points {cap}")
    A, b, eq = _integer_rows(inst)
    n = inst.n_int
    if n == 0:
        ok = all((0 == rhs) if e else (0 <= rhs) for rhs, e in zip(b, eq))
        return np.zeros((1 if ok else 0, 0), dtype=np.int64)
    ub = np.array(inst.upper_bounds, dtype=np.int64)
    bound = max([sum(abs(v) * u for v, u in zip(a, inst.upper_bounds)) for a in A] + [0])
    if bound >= 1 << 62 or any(abs(v) >= 1 << 62 for v in b):
        pts = [x for x in _slow_box(inst)]
        return np.array(pts, dtype=np.int64).reshape(len(pts), n)
    return _kernels.enumerate_box(np.array(A, dtype=np.int64).reshape(len(A), n),
                                  np.array(b, dtype=np.int64), np.array(eq, dtype=bool), ub)


def _slow_box(inst):
    from ..model import iter_box
    for x in iter_box(inst.upper_bounds):
        if inst.is_feasible_point(x):
            yield x


# ----------------------------------------------------------------- hull core

def _homogenise(points) -> tuple[np.ndarray, int]:
    """Rows ``(t, t*p)`` with ``t`` the common denominator of ``p``."""
    if isinstance(points, np.ndarray) and points.dtype.kind in "iu":
        N, d = points.shape
        G = np.empty((N, d + 1), dtype=np.int64)
        G[:, 0] = 1
        G[:, 1:] = points
        return G, d
    pts = [tuple(Fraction(v) for v in p) for p in points]
    d = len(pts[0])
    rows = []
    big = False
    for p in pts:
        t = exactmath.lcm_denominators(p)
        row = [t] + [int(v * t) for v in p]
        big = big or any(abs(v) >= 1 << 31 for v in row)
        rows.append(row)
    if big:
        G = np.empty((len(rows), d + 1), dtype=object)
        for i, row in enumerate(rows):
            G[i, :] = row
        return G, d
    return np.array(rows, dtype=np.int64).reshape(len(rows), d + 1), d


def _unique_sorted(points):
    if isinstance(points, np.ndarray) and points.dtype.kind in "iu":
        if points.shape[0] == 0:
            return points
        return np.unique(points, axis=0)
    pts = sorted({tuple(Fraction(v) for v in p) for p in points})
    return pts


def hull_facets(points, max_dim: int = MAX_HULL_DIM, stats: dict | None = None) -> Polyhedron:
    """Complete irredundant facet description of ``conv(points)``.

    ``points`` is an integer array or a sequence of rational vectors.  The
    result carries the affine hull as equations and the facets relative to
    it, sorted by canonical form.
    """
    pts = _unique_sorted(points)
    if len(pts) == 0:
        raise ValueError("hull of an empty point set")
    G, d = _homogenise(pts)
    if d > max_dim:
        raise CapExceeded(f"dimension {d} above --cap-dim {max_dim}")
    basis = greedy_row_basis(G)
    k = len(basis)
    Bfull = [[int(v) for v in G[i]] for i in basis]
    null = exactmath.nullspace(Bfull, d + 1) if k < d + 1 else []
    equations = [(row[1:], -row[0]) for row in null]
    if k == 1:
        return canonical_polyhedron(d, equations, [])
    _, _, J = exactmath.row_reduce(Bfull)
    H = G[:, J]
    rays, _ = extreme_rays(H, basis, stats)
    ineqs = []
    for r in rays:
        a = [0] * (d + 1)
        for j, v in zip(J, r):
            a[j] = int(v)
        ineqs.append(([-v for v in a[1:]], a[0]))
    return canonical_polyhedron(d, equations, ineqs)


def count_facets(poly: Polyhedron) -> tuple[int, int, int]:
    """``(total, nontrivial, equations)``; bounds are the trivial facets."""
    total = len(poly.facets)
    nontrivial = sum(1 for f in poly.facets if f.kind != "bound")
    return total, nontrivial, len(poly.equations)


def count_by(poly: Polyhedron, convention: str) -> int:
    total, nontrivial, _ = count_facets(poly)
    if convention == "total":
        return total
    if convention == "nontrivial":
        return nontrivial
    raise ValueError(f"unknown convention {convention!r}")


def instance_hull(inst: MipInstance, cap: int = DEFAULT_POINT_CAP) -> Polyhedron | None:
    """Hull of the feasible integer points, ``None`` when there are none."""
    pts = enumerate_feasible_points(inst, cap)
    if pts.shape[0] == 0:
        return None
    return hull_facets(pts)


def certify_hull(points, poly: Polyhedron) -> str | None:
    """Independent check of a hull: validity, facet dimension, completeness
    of the affine hull.  Returns a description of the first problem found."""
    pts = [tuple(Fraction(v) for v in p) for p in _unique_sorted(points)]
    for e in poly.equations:
        if any(e.residual(p) != 0 for p in pts):
            return f"equation {e.format()} violated"
    aff = exactmath.affine_hull(pts)
    if len(aff) != len(poly.equations):
        return "affine hull dimension mismatch"
    dim_aff = poly.dim - len(aff)
    for f in poly.facets:
        tight = [p for p in pts if f.slack(p) == 0]
        if any(f.slack(p) < 0 for p in pts):
            return f"facet {f.format()} violated"
        if len(tight) == len(pts):
            return f"facet {f.format()} is an implicit equation"
        if not tight:
            return f"facet {f.format()} not supporting"
        diffs = [[a - b for a, b in zip(p, tight[0])] for p in tight[1:]]
        if (exactmath.rank(diffs) if diffs else 0) != dim_aff - 1:
            return f"facet {f.format()} is not a facet"
    if len(set(poly.facets)) != len(poly.facets):
        return "duplicate facets"
    return None


# ------------------------------------------------------------ vertex side

def vertices_of(dim: int, inequalities, equations=(), stats: dict | None = None) -> list[tuple[Fraction, ...]]:
    """Vertices of the bounded polyhedron ``{x : A x <= b, E x = f}``.

    ``inequalities`` and ``equations`` are ``(coeffs, rhs)`` pairs with exact
    entries.  Equations are eliminated first so the double description runs
    in the affine subspace.
    """
    eq_rows = [list(map(Fraction, c)) + [Fraction(b)] for c, b in equations]
    if eq_rows:
        r, R, piv = exactmath.row_reduce(eq_rows)
        if dim in piv:
            return []  # inconsistent equations
        R = R[:r]
    else:
        R, piv = [], []
    free = [j for j in range(dim) if j not in set(piv)]
    # x = x0 + F u over the free coordinates
    x0 = [Fraction(0)] * dim
    F = [[Fraction(0)] * len(free) for _ in range(dim)]
    for i, p in enumerate(piv):
        x0[p] = R[i][dim]
        for q, j in enumerate(free):
            F[p][q] = -R[i][j]
    for q, j in enumerate(free):
        F[j][q] = Fraction(1)
    f = len(free)
    rows = []
    for c, b in inequalities:
        c = [Fraction(v) for v in c]
        slack0 = Fraction(b) - exactmath.dot(c, x0)
        cf = [-sum((c[i] * F[i][q] for i in range(dim) if F[i][q]), Fraction(0)) for q in range(f)]
        vec = exactmath.integer_scale([slack0] + cf)
        if all(v == 0 for v in vec[1:]):
            if vec[0] < 0:
                return []
            continue
        rows.append(vec)
    rows.append([1] + [0] * f)
    big = any(abs(v) >= 1 << 31 for row in rows for v in row)
    if big:
        H = np.empty((len(rows), f + 1), dtype=object)
        for i, row in enumerate(rows):
            H[i, :] = row
    else:
        H = np.array(rows, dtype=np.int64)
    if f == 0:
        return [tuple(x0)]
    basis = greedy_row_basis(H)
    if len(basis) < f + 1:
        raise ValueError("polyhedron is unbounded")
    rays, _ = extreme_rays(H, basis, stats)
    out = []
    for ray in rays:
        t = int(ray[0])
        if t <= 0:
            if t < 0 or any(int(v) for v in ray[1:]):
                raise ValueError("polyhedron is unbounded")
            continue
        u = [Fraction(int(v), t) for v in ray[1:]]
        out.append(tuple(x0[i] + sum((F[i][q] * u[q] for q in range(f) if F[i][q]), Fraction(0))
                         for i in range(dim)))
    return sorted(set(out))


def polyhedron_vertices(poly: Polyhedron) -> list[tuple[Fraction, ...]]:
    return vertices_of(poly.dim, [(f.coeffs, f.rhs) for f in poly.facets],
                       [(e.coeffs, e.rhs) for e in poly.equations])


def extreme_points_of_integer_hull(inst: MipInstance, cap: int = DEFAULT_POINT_CAP) -> list[tuple[int, ...]]:
    """Vertices of ``conv`` of the feasible integer points.

    Every feasible 0/1 point is a vertex; otherwise points lying in the
    convex hull of the remaining ones are filtered out exactly.
    """
    pts = enumerate_feasible_points(inst, cap)
    as_tuples = [tuple(int(v) for v in p) for p in pts]
    if inst.is_binary() or len(as_tuples) <= 1:
        return as_tuples
    poly = hull_facets(pts)
    verts = {tuple(int(v) for v in p) for p in polyhedron_vertices(poly)}
    return [p for p in as_tuples if p in verts]


# ------------------------------------------------------------- projections

@dataclass(frozen=True)
class ProjectionCheck:
    equal: bool
    certificate: str = ""
    projected: Polyhedron | None = None

    def __bool__(self) -> bool:
        return self.equal


def project_points(points, proj_map) -> list[tuple[Fraction, ...]]:
    """Apply the linear map ``proj_map`` (rows = output coordinates)."""
    M = [[Fraction(v) for v in row] for row in proj_map]
    out = []
    for p in points:
        p = [Fraction(v) for v in p]
        out.append(tuple(sum((a * b for a, b in zip(row, p) if a), Fraction(0)) for row in M))
    return out


def check_projection_equality(extended_points, proj_map, original: Polyhedron) -> ProjectionCheck:
    """Is the image of ``conv(extended_points)`` equal to ``original``?

    The extended points are mapped, their hull is computed, and canonical
    descriptions are compared.  On failure the certificate names the first
    mismatching equation or facet.
    """
    images = project_points(extended_points, proj_map)
    if not images:
        return ProjectionCheck(False, "no extended points")
    if len(images[0]) != original.dim:
        return ProjectionCheck(False, "dimension mismatch")
    projected = hull_facets(images)
    if projected.equations != original.equations:
        missing = set(original.equations) ^ set(projected.equations)
        first = min(missing, key=lambda e: (e.coeffs, e.rhs))
        return ProjectionCheck(False, f"equation mismatch: {first.format()}", projected)
    diff = set(projected.facets) ^ set(original.facets)
    if diff:
        first = min(diff)
        side = "only in projection" if first in projected.facets else "only in original"
        return ProjectionCheck(False, f"facet {first.format()} {side}", projected)
    return ProjectionCheck(True, "", projected)


def coordinate_projection(dim_from: int, keep: Sequence[int]) -> list[list[int]]:
    return [[int(j == k) for j in range(dim_from)] for k in keep]

