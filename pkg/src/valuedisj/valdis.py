"""Value-disjunction extended formulations.

For a block ``N_i`` of integer variables the attainable nonzero values of
``sum_{j in N_i} A_j x_j`` get one binary variable each.  The extended
instance keeps the original ``x`` (and ``w``), appends the value variables
``y`` block by block, and adds

* linking equations ``sum_j A_j x_j = sum_k f_k y_k`` (one per target row),
* packing rows ``sum_k y_k <= 1``,
* the target rows rewritten over ``y`` instead of the block's ``x``.

The zero value is encoded by all ``y`` of the block being zero.  Singleton
blocks are left alone.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import MipInstance, Row, validate_partition
from .polyhedra import (
    DEFAULT_POINT_CAP,
    CapExceeded,
    Polyhedron,
    canonical_polyhedron,
    check_projection_equality,
    coordinate_projection,
    enumerate_feasible_points,
    hull_facets,
    polyhedron_vertices,
)


@dataclass(frozen=True)
class ValueSet:
    block: tuple[int, ...]
    rows: tuple[int, ...]
    values: tuple[tuple[Fraction, ...], ...]
    witnesses: tuple[tuple[int, ...], ...]

    @property
    def trivial(self) -> bool:
        return len(self.block) == 1

    def __len__(self) -> int:
        return len(self.values)


def enumerate_value_set(inst: MipInstance, block: Sequence[int], rows: Sequence[int] | None = None,
                        cap: int = DEFAULT_POINT_CAP) -> ValueSet:
    """Distinct nonzero values of the block's partial sums, with witnesses.

    Values are ordered lexicographically; each witness is the first block
    assignment (in lexicographic box order) attaining its value.
    """
    block = tuple(block)
    rows = tuple(range(len(inst.rows))) if rows is None else tuple(rows)
    size = 1
    for j in block:
        size *= inst.upper_bounds[j] + 1
    if size > cap:
        raise CapExceeded(f"block box has {size} points, above --cap-points {cap}")
    cols = [[inst.rows[r].int_coeffs[j] for r in rows] for j in block]
    seen: dict[tuple, tuple[int, ...]] = {}
    for x in itertools.product(*(range(inst.upper_bounds[j] + 1) for j in block)):
        val = tuple(sum((c[r] * v for c, v in zip(cols, x)), Fraction(0)) for r in range(len(rows)))
        if any(val) and val not in seen:
            seen[val] = x
    values = tuple(sorted(seen))
    return ValueSet(block, rows, values, tuple(seen[v] for v in values))


@dataclass(frozen=True)
class ExtendedFormulation:
    base: MipInstance
    partition: tuple[tuple[int, ...], ...]
    value_sets: tuple[ValueSet | None, ...]   # None for singleton blocks
    y_offset: dict                             # (block id, value index) -> extended int index
    instance: MipInstance                      # ints = x then y; conts = w
    linking_rows: tuple[int, ...]
    sos_rows: tuple[int, ...]
    aggregated_rows: tuple[int, ...]
    target_rows: tuple[int, ...]

    @property
    def n_y(self) -> int:
        return self.instance.n_int - self.base.n_int

    def block_y(self, b: int) -> list[int]:
        vs = self.value_sets[b]
        return [] if vs is None else [self.y_offset[(b, k)] for k in range(len(vs))]

    def projection_matrix(self) -> list[list[int]]:
        """Map extended (x, y, w) to original (x, w)."""
        n, ny, d = self.base.n_int, self.n_y, self.base.n_cont
        keep = list(range(n)) + [n + ny + t for t in range(d)]
        return coordinate_projection(n + ny + d, keep)

    def lift(self, x: Sequence[int]) -> tuple[int, ...]:
        """Extended integer point of a base point (y from the block values)."""
        y = [0] * self.n_y
        n = self.base.n_int
        for b, vs in enumerate(self.value_sets):
            if vs is None:
                continue
            cols = [[self.base.rows[r].int_coeffs[j] for r in vs.rows] for j in vs.block]
            val = tuple(sum((c[r] * x[j] for c, j in zip(cols, vs.block)), Fraction(0))
                        for r in range(len(vs.rows)))
            if any(val):
                y[self.y_offset[(b, vs.values.index(val))] - n] = 1
        return tuple(x) + tuple(y)

    def map_lines(self) -> list[str]:
        """Sidecar map: one line per y variable (1-based indices)."""
        from .exactmath import format_rat
        out = []
        for (b, k), idx in sorted(self.y_offset.items(), key=lambda t: t[1]):
            vs = self.value_sets[b]
            blk = ",".join(str(j + 1) for j in vs.block)
            val = ",".join(format_rat(v) for v in vs.values[k])
            out.append(f"y {idx + 1} block {blk} value {val}")
        return out


def build_extended_formulation(inst: MipInstance, blocks: Sequence[Sequence[int]],
                               target_rows: Sequence[int] | None = None,
                               cap: int = DEFAULT_POINT_CAP) -> ExtendedFormulation:
    part = validate_partition(inst, blocks)
    targets = tuple(range(len(inst.rows))) if target_rows is None else tuple(target_rows)
    n, d = inst.n_int, inst.n_cont
    value_sets: list[ValueSet | None] = []
    y_offset = {}
    nxt = n
    for b, block in enumerate(part):
        if len(block) == 1:
            value_sets.append(None)
            continue
        vs = enumerate_value_set(inst, block, targets, cap)
        value_sets.append(vs)
        for k in range(len(vs)):
            y_offset[(b, k)] = nxt
            nxt += 1
    ny = nxt - n
    zero_y = (Fraction(0),) * ny
    in_block = {j for vs in value_sets if vs is not None for j in vs.block}

    rows: list[Row] = []
    aggregated = []
    for r_idx, row in enumerate(inst.rows):
        if r_idx not in targets:
            rows.append(Row(row.int_coeffs + zero_y, row.cont_coeffs, row.rhs, row.sense))
            continue
        t = targets.index(r_idx)
        a = [Fraction(0) if j in in_block else row.int_coeffs[j] for j in range(n)] + list(zero_y)
        for b, vs in enumerate(value_sets):
            if vs is None:
                continue
            for k, val in enumerate(vs.values):
                a[y_offset[(b, k)]] = val[t]
        aggregated.append(len(rows))
        rows.append(Row(tuple(a), row.cont_coeffs, row.rhs, row.sense))

    linking, sos = [], []
    zero_w = (Fraction(0),) * d
    for b, vs in enumerate(value_sets):
        if vs is None:
            continue
        for t, r_idx in enumerate(targets):
            a = [Fraction(0)] * (n + ny)
            for j in vs.block:
                a[j] = inst.rows[r_idx].int_coeffs[j]
            for k, val in enumerate(vs.values):
                a[y_offset[(b, k)]] = -val[t]
            if any(a):
                linking.append(len(rows))
                rows.append(Row(tuple(a), zero_w, Fraction(0), "="))
        a = [Fraction(0)] * (n + ny)
        for k in range(len(vs)):
            a[y_offset[(b, k)]] = Fraction(1)
        sos.append(len(rows))
        rows.append(Row(tuple(a), zero_w, Fraction(1), "<="))

    obj = None
    if inst.objective is not None:
        c = inst.objective.coeffs
        obj = type(inst.objective)(inst.objective.sense, c[:n] + zero_y + c[n:])
    ext = MipInstance(n + ny, inst.upper_bounds + (1,) * ny, tuple(rows), d, obj)
    return ExtendedFormulation(inst, part, tuple(value_sets), y_offset, ext,
                               tuple(linking), tuple(sos), tuple(aggregated), targets)


# ------------------------------------------------- hull decomposition check

@dataclass(frozen=True)
class StructureCheck:
    holds: bool
    certificate: str
    original: Polyhedron
    intersected: Polyhedron           # combined description in (x, y) space
    origins: dict                     # facet -> sorted tuple of source labels
    pieces: dict                      # label -> Polyhedron in its own space

    def __bool__(self) -> bool:
        return self.holds


def _embed(poly: Polyhedron, coords: Sequence[int], dim: int):
    def lift(c):
        full = [0] * dim
        for j, v in zip(coords, c):
            full[j] = v
        return full
    eqs = [(lift(e.coeffs), e.rhs) for e in poly.equations]
    ineqs = [(lift(f.coeffs), f.rhs) for f in poly.facets]
    return eqs, ineqs


def verify_structure_theorem(inst: MipInstance, blocks: Sequence[Sequence[int]],
                             cap: int = DEFAULT_POINT_CAP) -> StructureCheck:
    """Compare conv F with the projection of (Q and every V_i intersected).

    The hulls of V_i and Q are computed from their integer points, embedded
    in the extended (x, y) space, intersected, vertex-enumerated, projected
    onto x and compared with the hull of F.
    """
    if inst.n_cont:
        raise ValueError("structure check needs a pure integer instance")
    ef = build_extended_formulation(inst, blocks, cap=cap)
    n, ny = inst.n_int, ef.n_y
    dim = n + ny
    original = hull_facets(enumerate_feasible_points(inst, cap))

    pieces = {}
    eqs, ineqs, labels = [], [], []
    for b, vs in enumerate(ef.value_sets):
        if vs is None:
            continue
        ys = ef.block_y(b)
        pts = []
        for x in itertools.product(*(range(inst.upper_bounds[j] + 1) for j in vs.block)):
            val = tuple(sum((inst.rows[r].int_coeffs[j] * v for j, v in zip(vs.block, x)), Fraction(0))
                        for r in vs.rows)
            y = [0] * len(ys)
            if any(val):
                y[vs.values.index(val)] = 1
            pts.append(tuple(x) + tuple(y))
        label = f"V{b + 1}"
        poly = hull_facets(pts)
        pieces[label] = poly
        e, i = _embed(poly, list(vs.block) + ys, dim)
        eqs += e
        ineqs += i
        labels += [label] * len(i)

    # Q lives on the y variables and the x of singleton blocks
    singles = [blk[0] for blk, vs in zip(ef.partition, ef.value_sets) if vs is None]
    q_coords = singles + list(range(n, dim))
    q_inst = MipInstance(
        len(q_coords),
        tuple(ef.instance.upper_bounds[j] for j in q_coords),
        tuple(Row(tuple(ef.instance.rows[r].int_coeffs[j] for j in q_coords), (), ef.instance.rows[r].rhs,
                  ef.instance.rows[r].sense)
              for r in ef.aggregated_rows + ef.sos_rows),
    )
    q_poly = hull_facets(enumerate_feasible_points(q_inst, cap))
    pieces["Q"] = q_poly
    e, i = _embed(q_poly, q_coords, dim)
    eqs += e
    ineqs += i
    labels += ["Q"] * len(i)

    inter = canonical_polyhedron(dim, eqs, ineqs)
    from .polyhedra import Canonicalizer
    canon = Canonicalizer(eqs, dim)
    origins: dict = {}
    for (c, rhs), lab in zip(ineqs, labels):
        if canon.implied(c, rhs):
            continue
        f = canon.canonical(c, rhs)
        origins.setdefault(f, set()).add(lab)
    origins = {f: tuple(sorted(v)) for f, v in origins.items()}

    verts = polyhedron_vertices(inter)
    check = check_projection_equality(verts, coordinate_projection(dim, range(n)), original)
    return StructureCheck(check.equal, check.certificate, original, inter, origins, pieces)
