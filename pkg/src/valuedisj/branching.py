"""Branching decisions compared by the size of their subproblem descriptions.

Two kinds of 4-way decisions are compared on small pure 0/1 instances:

* ``valdis3``: pick three variables, add the redundant row
  ``x_i + x_j + x_k <= 3``, build the value disjunction over it and branch
  on its value variables (sum fixed to 0, 1, 2, 3);
* ``var2``: fix two variables to the four 0/1 combinations.

The size of a decision is the sum of the facet counts of its subproblems.
A rank score predicts which triples give small sizes.
"""
from __future__ import annotations

import csv
import io
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactmath import rat
from .model import BranchFixing, MipInstance, apply_fixing
from .polyhedra import DEFAULT_POINT_CAP, count_by, instance_hull
from .valdis import ExtendedFormulation, build_extended_formulation


# -------------------------------------------------------------------- rank

@dataclass(frozen=True, order=True)
class RankScore:
    score: Fraction
    selection: tuple[int, ...]


def _median(vals: Sequence[Fraction]) -> Fraction:
    s = sorted(vals)
    return s[(len(s) - 1) // 2]  # lower median for even sizes


def rank_selection(inst: MipInstance, selection: Sequence[int]) -> RankScore:
    """``min_r (max - min)^2 / (2 + |median|)`` over the selected columns."""
    sel = tuple(selection)
    if not sel:
        raise ValueError("empty selection")
    best = None
    for row in inst.rows:
        vals = [row.int_coeffs[j] for j in sel]
        q = (max(vals) - min(vals)) ** 2 / (2 + abs(_median(vals)))
        best = q if best is None or q < best else best
    if best is None:
        raise ValueError("instance has no rows")
    return RankScore(Fraction(best), sel)


def rank_all(inst: MipInstance, size: int = 3) -> list[RankScore]:
    """Every selection of ``size`` variables, best (lowest) first; ties by
    selection order."""
    return sorted(rank_selection(inst, s) for s in itertools.combinations(range(inst.n_int), size))


# ------------------------------------------------------- row relaxation

@dataclass(frozen=True)
class RelaxationRow:
    source: int | None
    lower: Fraction
    upper: Fraction
    f_values: tuple[int, ...]
    rhs: Fraction


def sign_relaxation(row: Sequence, lower, upper, rhs, source: int | None = None) -> RelaxationRow:
    """Coefficients ``+1`` where ``a >= U``, ``-1`` where ``a <= L``, else 0."""
    lo, up = rat(lower), rat(upper)
    if lo >= up:
        raise ValueError("need L < U")
    f = []
    for a in row:
        a = rat(a)
        f.append(1 if a >= up else (-1 if a <= lo else 0))
    return RelaxationRow(source, lo, up, tuple(f), rat(rhs))


def default_thresholds(row: Sequence) -> tuple[Fraction, Fraction]:
    """``U`` is half the largest absolute coefficient and ``L = -U``."""
    big = max((abs(rat(a)) for a in row), default=Fraction(0))
    u = big / 2 if big else Fraction(1)
    return -u, u


# ------------------------------------------------------------- branching

def sos_branch_subproblems(ext: ExtendedFormulation, block: int) -> list[tuple[BranchFixing, MipInstance]]:
    """One subproblem with all value variables of ``block`` at zero, then one
    per value variable set to one.  The fixed columns are dropped."""
    ys = ext.block_y(block)
    if not ys:
        raise ValueError(f"block {block + 1} has no value variables")
    vs = ext.value_sets[block]
    out = []
    zero = BranchFixing.of({y: 0 for y in ys}, "value 0")
    out.append((zero, apply_fixing(ext.instance, zero)))
    for k, y in enumerate(ys):
        label = "value " + ",".join(str(v) for v in vs.values[k])
        fix = BranchFixing.of({z: int(z == y) for z in ys}, label)
        out.append((fix, apply_fixing(ext.instance, fix)))
    return out


def cardinality_disjunction(inst: MipInstance, selection: Sequence[int]) -> ExtendedFormulation:
    """Value disjunction over the redundant row ``sum_{selection} x <= sum of bounds``."""
    sel = tuple(selection)
    a = [int(j in sel) for j in range(inst.n_int)]
    cap = sum(inst.upper_bounds[j] for j in sel)
    aug = inst.add_row(a, cap)
    return build_extended_formulation(aug, [sel], target_rows=[len(aug.rows) - 1])


def value_branch_subproblems(inst: MipInstance, selection: Sequence[int]) -> list[tuple[BranchFixing, MipInstance]]:
    ext = cardinality_disjunction(inst, selection)
    return sos_branch_subproblems(ext, 0)


def two_variable_branch_subproblems(inst: MipInstance, i: int, j: int) -> list[tuple[BranchFixing, MipInstance]]:
    if inst.upper_bounds[i] != 1 or inst.upper_bounds[j] != 1:
        raise ValueError("two-variable branching needs binary variables")
    out = []
    for a, b in itertools.product((0, 1), repeat=2):
        fix = BranchFixing.of({i: a, j: b}, f"x{i + 1}={a},x{j + 1}={b}")
        out.append((fix, apply_fixing(inst, fix)))
    return out


def complete_description_size(subproblems: Sequence[MipInstance], convention: str = "nontrivial",
                              cap: int = DEFAULT_POINT_CAP) -> tuple[list[int], int]:
    """Facet count of each subproblem's hull (0 when empty) and their sum."""
    counts = []
    for sub in subproblems:
        if isinstance(sub, tuple):
            sub = sub[1]
        poly = instance_hull(sub, cap)
        counts.append(0 if poly is None else count_by(poly, convention))
    return counts, sum(counts)


# ------------------------------------------------------------- experiment

@dataclass(frozen=True)
class ExperimentRow:
    kind: str                 # "valdis3" or "var2"
    selection: tuple[int, ...]
    rank: Fraction | None
    sizes: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.sizes)


def _evaluate(args) -> ExperimentRow:
    inst, kind, sel, convention, cap = args
    if kind == "valdis3":
        subs = value_branch_subproblems(inst, sel)
        rank = rank_selection(inst, sel).score
    else:
        subs = two_variable_branch_subproblems(inst, *sel)
        rank = None
    sizes, _ = complete_description_size([s for _, s in subs], convention, cap)
    return ExperimentRow(kind, tuple(sel), rank, tuple(sizes))


@dataclass
class Experiment:
    rows: list[ExperimentRow]

    def of_kind(self, kind: str) -> list[ExperimentRow]:
        return [r for r in self.rows if r.kind == kind]

    def groups(self) -> list[tuple[str, float, int]]:
        """Mean size of the best 5, best 10%, best 30% ranked triples, all
        triples, and all pairs."""
        ranked = sorted(self.of_kind("valdis3"), key=lambda r: (r.rank, r.selection))
        n = len(ranked)
        out = []
        for name, size in (("best5", 5), ("best10%", -(-n * 10 // 100)),
                           ("best30%", -(-n * 30 // 100)), ("all", n)):
            grp = ranked[:min(size, n)]
            out.append((name, _mean(r.total for r in grp), len(grp)))
        pairs = self.of_kind("var2")
        out.append(("var2", _mean(r.total for r in pairs), len(pairs)))
        return out

    def group_mean(self, name: str) -> Fraction:
        ranked = sorted(self.of_kind("valdis3"), key=lambda r: (r.rank, r.selection))
        sizes = dict((g, c) for g, _, c in self.groups())
        pool = self.of_kind("var2") if name == "var2" else ranked[:sizes[name]]
        return Fraction(sum(r.total for r in pool), len(pool)) if pool else Fraction(0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        width = max((len(r.sizes) for r in self.rows), default=0)
        w.writerow(["kind", "selection", "rank"] + [f"size_sub{i + 1}" for i in range(width)] + ["total"])
        for r in self.rows:
            sel = " ".join(str(j + 1) for j in r.selection)
            rank = "" if r.rank is None else str(r.rank)
            w.writerow([r.kind, sel, rank] + list(r.sizes) + [""] * (width - len(r.sizes)) + [r.total])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "mean", "count"])
        for name, mean, count in self.groups():
            w.writerow([name, f"{mean:.4f}", count])
        return buf.getvalue()

    def histogram(self, kind: str, buckets: int = 20) -> list[tuple[float, float, int]]:
        """Fixed-width buckets between the observed min and max total."""
        vals = [r.total for r in self.of_kind(kind)]
        if not vals:
            return []
        lo, hi = min(vals), max(vals)
        width = (hi - lo) / buckets if hi > lo else 1.0
        counts = [0] * buckets
        for v in vals:
            b = min(int((v - lo) / width), buckets - 1) if hi > lo else 0
            counts[b] += 1
        return [(lo + b * width, lo + (b + 1) * width, counts[b]) for b in range(buckets)]

    def histogram_csv(self, buckets: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "lo", "hi", "count"])
        for kind in ("valdis3", "var2"):
            for lo, hi, c in self.histogram(kind, buckets):
                w.writerow([kind, f"{lo:.4f}", f"{hi:.4f}", c])
        return buf.getvalue()


def _mean(vals) -> float:
    vals = list(vals)
    return sum(vals) / len(vals) if vals else 0.0


def histogram_experiment(inst: MipInstance, block_size: int = 3, convention: str = "nontrivial",
                         workers: int = 1, cap: int = DEFAULT_POINT_CAP) -> Experiment:
    """Size of every ``block_size``-variable value-disjunction branching and
    every two-variable branching.  Results come back in selection order
    whatever the number of workers."""
    if inst.n_cont or not inst.is_binary():
        raise ValueError("the experiment needs a pure 0/1 instance")
    jobs = [(inst, "valdis3", s, convention, cap)
            for s in itertools.combinations(range(inst.n_int), block_size)]
    jobs += [(inst, "var2", s, convention, cap) for s in itertools.combinations(range(inst.n_int), 2)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            rows = list(pool.map(_evaluate, jobs, chunksize=4))
    else:
        rows = [_evaluate(j) for j in jobs]
    return Experiment(rows)
