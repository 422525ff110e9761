"""Command-line front end.

Exit codes: 0 on success, 1 on a domain error (bad input file, cap
exceeded, infeasible request), 2 on a usage error.  Output is deterministic:
the same arguments and input files give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib.resources import files
from pathlib import Path

from . import __version__
from .exactmath import ExactMathError, format_rat, format_rat_decimal, rat
from .model import ParseError, ValidationError, generate_market_split, load_instance, parse_blocks, \
    serialize_instance
from .polyhedra import CapExceeded, DEFAULT_POINT_CAP, MAX_HULL_DIM, count_facets, enumerate_feasible_points, \
    hull_facets


class DomainError(Exception):
    pass


# ------------------------------------------------------------------ helpers

def _resolve(path: str) -> Path:
    """An existing path, or else the packaged fixture with the same name."""
    p = Path(path)
    if p.exists():
        return p
    fx = files("valuedisj") / "fixtures" / p.name
    if fx.is_file():
        return Path(str(fx))
    raise DomainError(f"no such file: {path}")


def _instance(path: str):
    return load_instance(_resolve(path))


def _blocks(path_or_list: str):
    """A blocks file, or an inline list like ``1,2/3/4``."""
    try:
        p = _resolve(path_or_list)
        return parse_blocks(p.read_text())
    except DomainError:
        if all(ch.isdigit() or ch in ",/ " for ch in path_or_list):
            return parse_blocks(path_or_list.replace("/", "\n"))
        raise


def _indices(spec: str) -> list[int]:
    try:
        return [int(t) - 1 for t in spec.replace(" ", "").split(",") if t]
    except ValueError:
        raise DomainError(f"bad index list {spec!r}") from None


def _rats(spec: str) -> list[Fraction]:
    return [rat(t) for t in spec.replace(" ", "").split(",") if t]


def _rat_out(q) -> str:
    q = Fraction(q)
    return format_rat(q) if q.denominator == 1 else format_rat_decimal(q)


class Output:
    """Collects text lines, a JSON document and CSV tables for one command."""

    def __init__(self, args):
        self.fmt = args.format
        self.out_dir = Path(args.out) if args.out else None
        self.text: list[str] = []
        self.data: dict = {}
        self.tables: dict[str, tuple[list, list]] = {}
        self.files: dict[str, str] = {}

    def line(self, s: str = "") -> None:
        self.text.append(s)

    def table(self, name: str, header: list, rows: list) -> None:
        self.tables[name] = (header, rows)

    def file(self, name: str, content: str) -> None:
        self.files[name] = content

    def emit(self, stream) -> None:
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            for name, content in self.files.items():
                (self.out_dir / name).write_text(content)
            for name, (header, rows) in self.tables.items():
                (self.out_dir / f"{name}.csv").write_text(_csv(header, rows))
        if self.fmt == "json":
            stream.write(json.dumps(self.data, sort_keys=True, indent=2) + "\n")
        elif self.fmt == "csv":
            for i, (name, (header, rows)) in enumerate(self.tables.items()):
                if i:
                    stream.write("\n")
                stream.write(_csv(header, rows))
        else:
            stream.write("".join(s + "\n" for s in self.text))


def _csv(header, rows) -> str:
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _poly_rows(poly):
    rows = [["equation", " ".join(map(str, e.coeffs)), e.rhs] for e in poly.equations]
    rows += [[f.kind, " ".join(map(str, f.coeffs)), f.rhs] for f in poly.facets]
    return rows


def _hull_of(inst, args):
    pts = enumerate_feasible_points(inst, args.cap_points)
    if pts.shape[0] == 0:
        raise DomainError("instance has no feasible integer point")
    return hull_facets(pts, max_dim=args.cap_dim), pts.shape[0]


# ----------------------------------------------------------------- commands

def cmd_hull(args, out: Output):
    inst = _instance(args.file)
    poly, npts = _hull_of(inst, args)
    total, nontrivial, neq = count_facets(poly)
    out.data = {"points": npts, **poly.to_json()}
    out.table("facets", ["kind", "coeffs", "rhs"], _poly_rows(poly))
    out.file("facets.txt", "".join(s + "\n" for s in poly.lines()))
    if args.count:
        out.line(str(total if args.count == "total" else nontrivial))
        return
    for s in poly.lines():
        out.line(s)
    out.line(f"# points {npts} total {total} nontrivial {nontrivial} equations {neq}")


def cmd_reformulate(args, out: Output):
    from .valdis import build_extended_formulation
    inst = _instance(args.file)
    rows = _indices(args.rows) if args.rows else None
    ext = build_extended_formulation(inst, _blocks(args.blocks), rows, cap=args.cap_points)
    text = serialize_instance(ext.instance)
    mapping = ext.map_lines()
    out.file("extended.mip", text)
    out.file("extended.map", "".join(s + "\n" for s in mapping))
    for s in text.splitlines():
        out.line(s)
    for s in mapping:
        out.line("# " + s)
    out.data = {"instance": text, "map": mapping, "n_y": ext.n_y,
                "linking_rows": [r + 1 for r in ext.linking_rows], "sos_rows": [r + 1 for r in ext.sos_rows]}
    out.table("map", ["y", "block", "value"],
              [[m.split()[1], m.split()[3], m.split()[5]] for m in mapping])


def cmd_verify_structure(args, out: Output):
    from .valdis import verify_structure_theorem
    inst = _instance(args.file)
    res = verify_structure_theorem(inst, _blocks(args.blocks), cap=args.cap_points)
    out.line("true" if res.holds else "false")
    if res.certificate:
        out.line("# " + res.certificate)
    rows = []
    for e in res.intersected.equations:
        out.line(e.format())
        rows.append(["equation", " ".join(map(str, e.coeffs)), e.rhs, ""])
    for f in res.intersected.facets:
        origin = ",".join(res.origins.get(f, ()))
        out.line(f.format() + (f"  [{origin}]" if origin else ""))
        rows.append([f.kind, " ".join(map(str, f.coeffs)), f.rhs, origin])
    out.data = {"holds": res.holds, "certificate": res.certificate,
                "intersected": res.intersected.to_json(),
                "origins": [[list(f.coeffs), f.rhs, list(v)] for f, v in sorted(res.origins.items())]}
    out.table("intersected", ["kind", "coeffs", "rhs", "origin"], rows)


def cmd_linking_facets(args, out: Output):
    from .linking import linking_facets
    desc = linking_facets(args.n, args.mode, cap=args.cap_subsets)
    eq = desc.equation
    out.line(eq.format())
    rows = [["equation", "", " ".join(map(str, eq.coeffs)), eq.rhs]]
    facets = []
    for f in desc.facets:
        if args.mode == "symbolic":
            out.line(f.descriptor())
        out.line(f.inequality.format())
        rows.append([f.tag, f.descriptor(), " ".join(map(str, f.inequality.coeffs)), f.inequality.rhs])
        facets.append({"tag": f.tag, "descriptor": f.descriptor(),
                       "coeffs": list(f.inequality.coeffs), "rhs": f.inequality.rhs})
    out.line(f"# facets {len(facets)} equations 1")
    out.data = {"n": args.n, "equation": {"coeffs": list(eq.coeffs), "rhs": eq.rhs}, "facets": facets}
    out.table("linking", ["tag", "descriptor", "coeffs", "rhs"], rows)


def cmd_separate(args, out: Output):
    from .linking import separate_linking
    x, y = _rats(args.x), _rats(args.y)
    n = args.n if args.n is not None else len(x)
    if len(x) != n or len(y) != n:
        raise DomainError(f"--x and --y need {n} entries each")
    res = separate_linking(n, x, y)
    if res.status == "feasible":
        msg = "feasible"
    elif res.status == "violated":
        T = "{" + ",".join(str(j + 1) for j in res.subset) + "}"
        msg = f"violated T={T} by {_rat_out(res.violation)}"
    else:
        msg = f"trivial violation of {res.constraint} by {_rat_out(res.violation)}"
    out.line(msg)
    out.data = {"status": res.status, "subset": [j + 1 for j in res.subset],
                "violation": format_rat(res.violation), "constraint": res.constraint}
    out.table("separation", ["status", "subset", "violation", "constraint"],
              [[res.status, " ".join(str(j + 1) for j in res.subset), format_rat(res.violation), res.constraint]])


def cmd_knapsack_k(args, out: Output):
    from .linking import knapsack_k_extended_description
    inst = _instance(args.file)
    ext = knapsack_k_extended_description(inst, explicit=not args.symbolic, cap=args.cap_points)
    out.line(f"# classes {len(ext.classes)} p {ext.p} dim {ext.dim}")
    for i, (cls, v) in enumerate(zip(ext.classes, ext.class_values)):
        out.line(f"# class {i + 1} coefficient {format_rat(v)} variables " + " ".join(str(j + 1) for j in cls))
    for vtx in ext.vertices:
        out.line("v " + " ".join(map(str, vtx)))
    rows = []
    for c, r in ext.equations:
        out.line("=: " + " ".join(map(str, c)) + f" = {r}")
        rows.append(["equation", "", " ".join(map(str, c)), r])
    for c, r in ext.inequalities:
        out.line(" ".join(map(str, c)) + f" <= {r}")
        rows.append(["inequality", "", " ".join(map(str, c)), r])
    if args.symbolic:
        for i, cls in enumerate(ext.classes):
            if len(cls) > 1:
                out.line(f"family cover: class {i + 1}, every nonempty proper T")
    else:
        for desc, (c, r) in ext.cover_rows():
            rows.append(["cover", desc, " ".join(map(str, c)), r])
    out.data = {"p": ext.p, "dim": ext.dim, "classes": [[j + 1 for j in c] for c in ext.classes],
                "vertices": [list(v) for v in ext.vertices],
                "equations": [[list(c), r] for c, r in ext.equations],
                "inequalities": [[list(c), r] for c, r in ext.all_inequalities()] if not args.symbolic
                else [[list(c), r] for c, r in ext.inequalities]}
    out.table("knapsack", ["kind", "descriptor", "coeffs", "rhs"], rows)


def cmd_rank(args, out: Output):
    from .branching import rank_all, rank_selection
    inst = _instance(args.file)
    if args.select:
        scores = [rank_selection(inst, _indices(args.select))]
    else:
        scores = rank_all(inst, args.size)[:args.top]
    rows = []
    for s in scores:
        sel = ",".join(str(j + 1) for j in s.selection)
        if args.select:
            out.line(_rat_out(s.score))
        else:
            out.line(f"{{{sel}}} {_rat_out(s.score)}")
        rows.append([sel, format_rat(s.score), f"{float(s.score):.6f}"])
    out.data = {"scores": [{"selection": [j + 1 for j in s.selection], "score": format_rat(s.score)}
                           for s in scores]}
    out.table("rank", ["selection", "score", "decimal"], rows)


def cmd_branch_eval(args, out: Output):
    from .branching import complete_description_size, histogram_experiment, two_variable_branch_subproblems, \
        value_branch_subproblems
    inst = _instance(args.file)
    conv = args.count or "nontrivial"
    if args.select:
        sel = _indices(args.select)
        if len(sel) == 2:
            subs = two_variable_branch_subproblems(inst, *sel)
        else:
            subs = value_branch_subproblems(inst, sel)
        sizes, total = complete_description_size([s for _, s in subs], conv, args.cap_points)
        rows = [[fix.label, s] for (fix, _), s in zip(subs, sizes)]
        for label, s in rows:
            out.line(f"{label}: {s}")
        out.line(f"total {total}")
        out.data = {"convention": conv, "subproblems": [{"label": l, "size": s} for l, s in rows], "total": total}
        out.table("branch", ["subproblem", "size"], rows)
        return
    exp = histogram_experiment(inst, 3, conv, workers=args.workers, cap=args.cap_points)
    out.file("experiment.csv", exp.to_csv())
    out.file("summary.csv", exp.summary_csv())
    out.file("histogram.csv", exp.histogram_csv())
    for name, mean, count in exp.groups():
        out.line(f"{name}: mean {mean:.4f} over {count}")
    out.data = {"convention": conv,
                "groups": [{"group": g, "mean": m, "count": c} for g, m, c in exp.groups()],
                "rows": [{"kind": r.kind, "selection": [j + 1 for j in r.selection],
                          "rank": None if r.rank is None else format_rat(r.rank),
                          "sizes": list(r.sizes), "total": r.total} for r in exp.rows]}
    import csv
    import io
    rows = list(csv.reader(io.StringIO(exp.to_csv())))
    out.table("experiment", rows[0], rows[1:])


def cmd_solve(args, out: Output):
    from .solver import branch_and_bound, market_split_feasibility, value_disjunction_workflow
    inst = _instance(args.file)
    if args.feasibility:
        inst = market_split_feasibility(inst)
    if args.workflow:
        block = _indices(args.block) if args.block else None
        res = value_disjunction_workflow(inst, args.row - 1, block=block)
        status, value, stats = res.status, res.value, res.stats
        extra = {"block": [j + 1 for j in res.block], "f": list(res.f_values)}
    else:
        sos = _indices(args.block) if (args.rule == "sos" and args.block) else None
        res = branch_and_bound(inst, args.rule, sos)
        status, value, stats = res.status, res.value, res.stats
        extra = {"point": None if res.point is None else [format_rat(v) for v in res.point]}
    out.line(f"status {status}")
    if value is not None:
        out.line(f"value {_rat_out(value)}")
    out.line(f"nodes {stats.nodes}")
    for label, nodes in stats.per_subproblem:
        out.line(f"  {label}: {nodes} nodes")
    out.data = {"status": status, "value": None if value is None else format_rat(value),
                "value_decimal": None if value is None else float(value), "nodes": stats.nodes,
                "per_subproblem": [{"label": l, "nodes": n} for l, n in stats.per_subproblem], **extra}
    out.table("solve", ["status", "value", "nodes"],
              [[status, "" if value is None else format_rat(value), stats.nodes]])


def cmd_gen_marketsplit(args, out: Output):
    inst = generate_market_split(args.m, args.n, args.seed, args.coeff_range)
    text = f"# market split m={args.m} n={args.n} seed={args.seed}\n" + serialize_instance(inst)
    out.file(f"marketsplit_m{args.m}_n{args.n}_s{args.seed}.mip", text)
    for s in text.splitlines():
        out.line(s)
    out.data = {"m": args.m, "n": args.n, "seed": args.seed, "instance": text}
    out.table("rows", ["row", "coeffs", "rhs"],
              [[i + 1, " ".join(format_rat(v) for v in r.int_coeffs), format_rat(r.rhs)]
               for i, r in enumerate(inst.rows)])


# ------------------------------------------------------------------- parser

def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--count", choices=("total", "nontrivial"), help="facet counting convention")
    common.add_argument("--cap-points", type=_positive, default=DEFAULT_POINT_CAP, help="max enumerated points")
    common.add_argument("--cap-dim", type=_positive, default=MAX_HULL_DIM, help="max hull dimension")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", metavar="DIR", help="also write artifacts to DIR")
    common.add_argument("--workers", type=_positive, default=1)
    common.add_argument("--seed", type=int, default=1)

    p = argparse.ArgumentParser(prog="valuedisj", description="Value-disjunction reformulation toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hull", parents=[common], help="facet description of the integer hull")
    s.add_argument("file")
    s.set_defaults(func=cmd_hull)

    s = sub.add_parser("reformulate", parents=[common], help="emit a value-disjunction formulation")
    s.add_argument("file")
    s.add_argument("--blocks", required=True, help="blocks file or inline list like 1,2/3/4")
    s.add_argument("--rows", help="target rows (1-based), default all")
    s.set_defaults(func=cmd_reformulate)

    s = sub.add_parser("verify-structure", parents=[common], help="check the hull decomposition on an instance")
    s.add_argument("file")
    s.add_argument("--blocks", required=True)
    s.set_defaults(func=cmd_verify_structure)

    s = sub.add_parser("linking-facets", parents=[common], help="closed-form linking polytope description")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--mode", choices=("explicit", "symbolic"), default="explicit")
    s.add_argument("--cap-subsets", type=_positive, default=1 << 16)
    s.set_defaults(func=cmd_linking_facets)

    s = sub.add_parser("separate", parents=[common], help="separate a point from the linking polytope")
    s.add_argument("--n", type=_positive)
    s.add_argument("--x", required=True, help="comma-separated rationals")
    s.add_argument("--y", required=True)
    s.set_defaults(func=cmd_separate)

    s = sub.add_parser("knapsack-k", parents=[common], help="extended description of a K-class knapsack")
    s.add_argument("file")
    s.add_argument("--symbolic", action="store_true", help="do not expand the cover rows")
    s.set_defaults(func=cmd_knapsack_k)

    s = sub.add_parser("rank", parents=[common], help="rank score of variable selections")
    s.add_argument("file")
    s.add_argument("--select", help="1-based indices, e.g. 1,2,3")
    s.add_argument("--size", type=_positive, default=3)
    s.add_argument("--top", type=_positive, default=10)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("branch-eval", parents=[common], help="complete description sizes of branchings")
    s.add_argument("file")
    s.add_argument("--select", help="2 indices (variable branching) or more (value disjunction)")
    s.set_defaults(func=cmd_branch_eval)

    s = sub.add_parser("solve", parents=[common], help="exact branch and bound")
    s.add_argument("file")
    s.add_argument("--rule", choices=("variable", "sos"), default="variable")
    s.add_argument("--block", help="1-based value variables (sos rule) or workflow block")
    s.add_argument("--workflow", action="store_true", help="relax a row and branch on its value disjunction")
    s.add_argument("--row", type=_positive, default=1, help="dense row for the workflow")
    s.add_argument("--feasibility", action="store_true", help="solve the slack reformulation")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("gen-marketsplit", parents=[common], help="generate a market split instance")
    s.add_argument("--m", type=_positive, default=2)
    s.add_argument("--n", type=_positive, default=10)
    s.add_argument("--coeff-range", type=_positive, default=100)
    s.set_defaults(func=cmd_gen_marketsplit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args)
    try:
        args.func(args, out)
    except (DomainError, ParseError, ValidationError, CapExceeded, ExactMathError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        out.emit(sys.stdout)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
