"""Exact rational arithmetic and linear algebra.

Rationals are :class:`fractions.Fraction`; vectors are tuples and matrices
are lists of row lists.  Everything here is pure and allocation-only, so it
is safe to call from concurrent workers.
"""
from __future__ import annotations

import math
import operator
import re
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


class ExactMathError(ArithmeticError):
    pass


_RAT_RE = re.compile(r"[+-]?\d+(/\d+)?")


def rat(value) -> Fraction:
    """Coerce ``value`` (int, Fraction or ``"p/q"`` string) to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RAT_RE.fullmatch(text):
            raise ExactMathError(f"not a rational number: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ExactMathError(f"not a rational number: {value!r}") from exc
    if isinstance(value, float):
        raise ExactMathError("floats are not accepted as exact input")
    return Fraction(value)


def rat_arith(a, b, op: str) -> Fraction:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    a, b = rat(a), rat(b)
    if op == "div" and b == 0:
        raise ExactMathError("division by zero")
    return fn(a, b)


def format_rat(q) -> str:
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_rat_decimal(q, digits: int = 6) -> str:
    """``p/q (d.dddd)`` when ``q`` is fractional, plain integer otherwise."""
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{format_rat(q)} ({float(q):.{digits}g})"


def lcm_denominators(values: Iterable) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, rat(v).denominator)
    return out


def integer_scale(values: Sequence) -> list[int]:
    """Scale a rational vector to integers with gcd 1 (sign preserved)."""
    vals = [rat(v) for v in values]
    m = lcm_denominators(vals)
    ints = [int(v * m) for v in vals]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def row_reduce(matrix: Sequence[Sequence]) -> tuple[int, list[list[Fraction]], list[int]]:
    """Reduced row-echelon form over the rationals.

    Returns ``(rank, rref, pivot_columns)``; ``rref`` keeps the original row
    count with zero rows at the bottom.
    """
    M = [[rat(v) for v in row] for row in matrix]
    if not M:
        return 0, [], []
    nrows, ncols = len(M), len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        if piv != 1:
            M[r] = [v / piv for v in M[r]]
        for i in range(nrows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                Mi, Mr = M[i], M[r]
                M[i] = [a - f * b for a, b in zip(Mi, Mr)]
        pivots.append(c)
        r += 1
    return r, M, pivots


def rank(matrix: Sequence[Sequence]) -> int:
    return row_reduce(matrix)[0]


def nullspace(matrix: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{v : M v = 0}``, one vector per free column."""
    if not matrix:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(matrix[0])
    r, R, pivots = row_reduce(matrix)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][f]
        basis.append(v)
    return basis


def canonical_equation(coeffs: Sequence, rhs) -> tuple[tuple[int, ...], int]:
    """Integer form with gcd 1 and first nonzero coefficient positive."""
    vec = integer_scale(list(coeffs) + [rhs])
    lead = next((x for x in vec[:-1] if x != 0), 0)
    if lead < 0:
        vec = [-x for x in vec]
    return tuple(vec[:-1]), vec[-1]


def affine_hull(points: Sequence[Sequence]) -> list[tuple[tuple[int, ...], int]]:
    """Minimal canonical equation system ``a.x = b`` satisfied by all points.

    The equations are the rows of the RREF of the homogenised nullspace, so
    the output is independent of point order.
    """
    if not points:
        raise ValueError("affine_hull needs at least one point")
    dim = len(points[0])
    if any(len(p) != dim for p in points):
        raise ValueError("points differ in dimension")
    # equations (a, -b) annihilate every homogenised point (x, 1)
    homog = [list(map(rat, p)) + [Fraction(1)] for p in points]
    basis = _row_basis(homog)
    eqs = nullspace(basis, dim + 1) if basis else []
    if not eqs:
        return []
    _, R, _ = row_reduce(eqs)
    out = []
    for row in R:
        if all(v == 0 for v in row):
            continue
        out.append(canonical_equation(row[:-1], -row[-1]))
    return out


def _row_basis(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Linearly independent subset of ``rows`` (first-come, greedy)."""
    basis: list[list[Fraction]] = []
    echelon: list[tuple[int, list[Fraction]]] = []
    for row in rows:
        v = list(row)
        for pc, e in echelon:
            if v[pc] != 0:
                f = v[pc]
                v = [a - f * b for a, b in zip(v, e)]
        lead = next((i for i, x in enumerate(v) if x != 0), None)
        if lead is None:
            continue
        piv = v[lead]
        echelon.append((lead, [x / piv for x in v]))
        basis.append(list(row))
        if len(basis) == len(row):
            break
    return basis


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Unique solution of a square nonsingular system, ``None`` if singular."""
    n = len(matrix)
    aug = [list(map(rat, row)) + [rat(b)] for row, b in zip(matrix, rhs)]
    r, R, pivots = row_reduce(aug)
    if r != n or pivots != list(range(n)):
        return None
    return [R[i][n] for i in range(n)]


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))
