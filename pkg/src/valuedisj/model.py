"""Bounded mixed-integer instances, block partitions and branch fixings.

Variables are 0-based internally.  The text format and the blocks file are
1-based, matching how instances are written down by hand.

Instance format::

    # comment
    ints 4
    conts 0
    bounds 2 2 2 2
    obj max 1 1 1 1
    row 1 1 2 3 <= 7
    row 1 1 0 0 | 1 >= 1      (continuous part after "|")
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactmath import format_rat, rat

SENSES = ("<=", "=", ">=")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    int_coeffs: tuple[Fraction, ...]
    cont_coeffs: tuple[Fraction, ...]
    rhs: Fraction
    sense: str = "<="

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValidationError(f"bad sense {self.sense!r}")

    def satisfied(self, x: Sequence, w: Sequence = ()) -> bool:
        lhs = sum((a * v for a, v in zip(self.int_coeffs, x)), Fraction(0))
        lhs += sum((g * v for g, v in zip(self.cont_coeffs, w)), Fraction(0))
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class Objective:
    sense: str  # "max" | "min"
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValidationError(f"bad objective sense {self.sense!r}")


@dataclass(frozen=True)
class MipInstance:
    n_int: int
    upper_bounds: tuple[int, ...]
    rows: tuple[Row, ...] = ()
    n_cont: int = 0
    objective: Objective | None = None
    # child-to-parent integer index map, set by apply_fixing
    origin: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.upper_bounds) != self.n_int:
            raise ValidationError("bounds length does not match n_int")
        for j, u in enumerate(self.upper_bounds):
            if u < 0:
                raise ValidationError(f"negative upper bound for variable {j + 1}")
        for i, r in enumerate(self.rows):
            if len(r.int_coeffs) != self.n_int or len(r.cont_coeffs) != self.n_cont:
                raise ValidationError(f"row {i + 1} has wrong length")
        if self.objective is not None and len(self.objective.coeffs) != self.n_int + self.n_cont:
            raise ValidationError("objective has wrong length")

    @classmethod
    def build(cls, rows: Iterable, upper_bounds: Sequence[int], n_cont: int = 0,
              objective=None) -> "MipInstance":
        """Convenience constructor.

        ``rows`` holds ``(int_coeffs, rhs)``, ``(int_coeffs, rhs, sense)`` or
        ``(int_coeffs, cont_coeffs, rhs, sense)`` tuples with any exact
        numeric entries; ``objective`` is ``(sense, coeffs)``.
        """
        built = []
        for r in rows:
            if isinstance(r, Row):
                built.append(r)
                continue
            if len(r) == 2:
                a, b = r
                g, s = (), "<="
            elif len(r) == 3:
                a, b, s = r
                g = ()
            else:
                a, g, b, s = r
            g = tuple(rat(v) for v in g) or (Fraction(0),) * n_cont
            built.append(Row(tuple(rat(v) for v in a), g, rat(b), s))
        obj = None
        if objective is not None:
            obj = Objective(objective[0], tuple(rat(v) for v in objective[1]))
        return cls(len(upper_bounds), tuple(int(u) for u in upper_bounds),
                   tuple(built), n_cont, obj)

    @property
    def n_vars(self) -> int:
        return self.n_int + self.n_cont

    def is_binary(self) -> bool:
        return all(u == 1 for u in self.upper_bounds)

    def box_size(self) -> int:
        out = 1
        for u in self.upper_bounds:
            out *= u + 1
        return out

    def le_rows(self) -> list[tuple[tuple[Fraction, ...], Fraction]]:
        """All rows as ``<=`` rows over (ints, conts); equations give a pair."""
        out = []
        for r in self.rows:
            coeffs = r.int_coeffs + r.cont_coeffs
            if r.sense in ("<=", "="):
                out.append((coeffs, r.rhs))
            if r.sense in (">=", "="):
                out.append((tuple(-c for c in coeffs), -r.rhs))
        return out

    def is_feasible_point(self, x: Sequence, w: Sequence = ()) -> bool:
        if any(v < 0 or v > u for v, u in zip(x, self.upper_bounds)):
            return False
        return all(r.satisfied(x, w) for r in self.rows)

    def with_rows(self, rows: Iterable[Row]) -> "MipInstance":
        return replace(self, rows=tuple(rows))

    def add_row(self, int_coeffs, rhs, sense="<=", cont_coeffs=None) -> "MipInstance":
        g = tuple(rat(v) for v in cont_coeffs) if cont_coeffs else (Fraction(0),) * self.n_cont
        row = Row(tuple(rat(v) for v in int_coeffs), g, rat(rhs), sense)
        return replace(self, rows=self.rows + (row,))


# --------------------------------------------------------------------- parsing

def parse_instance(text) -> MipInstance:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    n_int = None
    n_cont = 0
    bounds = None
    obj = None
    raw_rows = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        try:
            if key == "ints":
                n_int = int(rest[0])
            elif key == "conts":
                n_cont = int(rest[0])
            elif key == "bounds":
                bounds = tuple(int(v) for v in rest)
            elif key == "obj":
                if not rest or rest[0] not in ("max", "min"):
                    raise ParseError("objective needs max|min", lineno)
                obj = (rest[0], tuple(rat(v) for v in rest[1:]))
            elif key == "row":
                raw_rows.append((lineno, rest))
            else:
                raise ParseError(f"unknown keyword {key!r}", lineno)
        except ParseError:
            raise
        except (ValueError, IndexError, ArithmeticError) as exc:
            raise ParseError(str(exc), lineno) from None
    if n_int is None:
        raise ParseError("missing 'ints' line")
    if bounds is None:
        raise ParseError("missing 'bounds' line (every integer variable needs a bound)")
    if len(bounds) != n_int:
        raise ParseError(f"expected {n_int} bounds, got {len(bounds)}")
    if any(u < 0 for u in bounds):
        raise ValidationError("upper bounds must be nonnegative")
    rows = []
    for lineno, toks in raw_rows:
        rows.append(_parse_row(toks, n_int, n_cont, lineno))
    objective = None
    if obj is not None:
        if len(obj[1]) != n_int + n_cont:
            raise ParseError("objective length mismatch")
        objective = Objective(*obj)
    return MipInstance(n_int, bounds, tuple(rows), n_cont, objective)


def _parse_row(toks: list[str], n_int: int, n_cont: int, lineno: int) -> Row:
    sense_pos = [i for i, t in enumerate(toks) if t in SENSES]
    if len(sense_pos) != 1 or sense_pos[0] != len(toks) - 2:
        raise ParseError("row must end with '<=|=|>= rhs'", lineno)
    sense, rhs_tok = toks[-2], toks[-1]
    body = toks[:-2]
    if "|" in body:
        k = body.index("|")
        a_tok, g_tok = body[:k], body[k + 1:]
    else:
        a_tok, g_tok = body, []
    # the "|" part may be omitted; continuous coefficients then default to 0
    if len(a_tok) != n_int or ("|" in body and len(g_tok) != n_cont):
        raise ParseError("row has the wrong number of coefficients", lineno)
    try:
        a = tuple(rat(v) for v in a_tok)
        g = tuple(rat(v) for v in g_tok) if g_tok else (Fraction(0),) * n_cont
        rhs = rat(rhs_tok)
    except ArithmeticError as exc:
        raise ParseError(str(exc), lineno) from None
    return Row(a, g, rhs, sense)


def serialize_instance(inst: MipInstance) -> str:
    out = [f"ints {inst.n_int}"]
    if inst.n_cont:
        out.append(f"conts {inst.n_cont}")
    out.append("bounds " + " ".join(str(u) for u in inst.upper_bounds))
    if inst.objective is not None:
        out.append(f"obj {inst.objective.sense} " + " ".join(map(format_rat, inst.objective.coeffs)))
    for r in inst.rows:
        parts = [format_rat(v) for v in r.int_coeffs]
        if inst.n_cont:
            parts.append("|")
            parts.extend(format_rat(v) for v in r.cont_coeffs)
        out.append("row " + " ".join(parts) + f" {r.sense} {format_rat(r.rhs)}")
    return "\n".join(out) + "\n"


def load_instance(path) -> MipInstance:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def parse_blocks(text: str) -> list[tuple[int, ...]]:
    """Blocks file: one block per line, 1-based indices; returns 0-based."""
    blocks = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            blocks.append(tuple(int(t) - 1 for t in line.split()))
        except ValueError:
            raise ParseError("block indices must be integers", lineno) from None
    return blocks


def serialize_blocks(blocks: Sequence[Sequence[int]]) -> str:
    return "".join(" ".join(str(j + 1) for j in b) + "\n" for b in blocks)


# ----------------------------------------------------------------- partitions

def validate_partition(inst: MipInstance, blocks: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Check disjointness and append uncovered variables as singletons."""
    seen: dict[int, int] = {}
    bad = set()
    out = []
    for b, block in enumerate(blocks):
        block = tuple(int(j) for j in block)
        if not block:
            raise ValidationError(f"block {b + 1} is empty")
        for j in block:
            if not 0 <= j < inst.n_int:
                raise ValidationError(f"index {j + 1} out of range")
            if j in seen:
                bad.add(j)
            seen[j] = b
        if len(set(block)) != len(block):
            bad.update(j for j in block if block.count(j) > 1)
        out.append(block)
    if bad:
        listed = ", ".join(str(j + 1) for j in sorted(bad))
        raise ValidationError(f"blocks overlap on indices {listed}")
    out.extend((j,) for j in range(inst.n_int) if j not in seen)
    return tuple(out)


# ------------------------------------------------------------------- fixings

@dataclass(frozen=True)
class BranchFixing:
    """Variable fixings making up one branch; ``label`` is for reports."""
    assignments: tuple[tuple[int, int], ...]
    label: str = ""

    @classmethod
    def of(cls, mapping: Mapping[int, int], label: str = "") -> "BranchFixing":
        return cls(tuple(sorted((int(k), int(v)) for k, v in mapping.items())), label)


def apply_fixing(inst: MipInstance, fix: BranchFixing | Mapping[int, int]) -> MipInstance:
    """Substitute fixed integer variables into rows and drop their columns."""
    if not isinstance(fix, BranchFixing):
        fix = BranchFixing.of(fix)
    values = dict(fix.assignments)
    for j, v in values.items():
        if not 0 <= j < inst.n_int:
            raise ValidationError(f"fixing index {j + 1} out of range")
        if not 0 <= v <= inst.upper_bounds[j]:
            raise ValidationError(f"fixing x{j + 1}={v} violates its bounds")
    if not values:
        return inst
    keep = [j for j in range(inst.n_int) if j not in values]
    rows = []
    for r in inst.rows:
        shift = sum((r.int_coeffs[j] * v for j, v in values.items()), Fraction(0))
        rows.append(Row(tuple(r.int_coeffs[j] for j in keep), r.cont_coeffs, r.rhs - shift, r.sense))
    obj = None
    if inst.objective is not None:
        c = inst.objective.coeffs
        obj = Objective(inst.objective.sense, tuple(c[j] for j in keep) + c[inst.n_int:])
    parent = inst.origin or tuple(range(inst.n_int))
    return MipInstance(len(keep), tuple(inst.upper_bounds[j] for j in keep), tuple(rows),
                       inst.n_cont, obj, origin=tuple(parent[j] for j in keep))


def objective_offset(inst: MipInstance, fix: BranchFixing | Mapping[int, int]) -> Fraction:
    """Objective contribution of the fixed variables (dropped by apply_fixing)."""
    if inst.objective is None:
        return Fraction(0)
    values = dict(fix.assignments) if isinstance(fix, BranchFixing) else dict(fix)
    return sum((inst.objective.coeffs[j] * v for j, v in values.items()), Fraction(0))


# ------------------------------------------------------------ market split

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, fully portable.

    ``below(n)`` draws uniformly from ``range(n)`` by rejection on the top
    bits, so the stream is identical on every platform and Python version.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next()
            if v < limit:
                return v % n


def generate_market_split(m: int, n: int, seed: int, coeff_range: int = 100) -> MipInstance:
    """``m`` equality rows, coefficients uniform in ``0..coeff_range-1``,
    right-hand side ``floor(row sum / 2)``, binary variables."""
    if m < 1 or n < 1:
        raise ValidationError("market split needs m >= 1 and n >= 1")
    rng = SplitMix64(seed)
    rows = []
    for _ in range(m):
        a = [rng.below(coeff_range) for _ in range(n)]
        rows.append((a, sum(a) // 2, "="))
    return MipInstance.build(rows, [1] * n)


def iter_box(upper_bounds: Sequence[int]):
    """Integer points of the box in lexicographic order."""
    return itertools.product(*(range(u + 1) for u in upper_bounds))
