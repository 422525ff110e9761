import csv
import io
import json

import pytest

from valuedisj.cli import main
from conftest import fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_hull_count(capsys):
    code, out, _ = run(capsys, "hull", str(fixture_path("ex1.mip")), "--count", "nontrivial")
    assert code == 0 and out.strip() == "13"


def test_hull_lists_known_facet(capsys):
    code, out, _ = run(capsys, "hull", "examples/ex1.mip")
    assert code == 0 and "5 -1 -1 -2 -2 -3 -4 -4 <= 0" in out.splitlines()


def test_hull_json_and_csv(capsys):
    _, out, _ = run(capsys, "hull", "examples/ex3.mip", "--format", "json")
    doc = json.loads(out)
    assert doc["counts"]["total"] == 14
    _, out, _ = run(capsys, "hull", "examples/ex3.mip", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 15


def test_reformulate_writes_files(capsys, tmp_path):
    code, _, _ = run(capsys, "reformulate", "examples/ex3.mip", "--blocks", "1,2/3/4", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "extended.mip").exists()
    assert (tmp_path / "extended.map").read_text().splitlines()[0] == "y 5 block 1,2 value 1"


def test_verify_structure(capsys):
    code, out, _ = run(capsys, "verify-structure", "examples/ex3.mip", "--blocks", "1,2/3/4")
    assert code == 0 and out.splitlines()[0] == "true"


def test_separate_and_rank(capsys):
    _, out, _ = run(capsys, "separate", "--n", "2", "--x", "1,0", "--y", "1/2,1/4")
    assert out.strip() == "violated T={1} by 1/4 (0.25)"
    _, out, _ = run(capsys, "rank", "examples/instance4.mip", "--select", "1,2,3")
    assert "1/12" in out


def test_branch_eval_pair(capsys):
    _, out, _ = run(capsys, "branch-eval", "examples/ex5.mip", "--select", "7,8")
    assert out.splitlines()[-1] == "total 22"


def test_solve_and_generate(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-marketsplit", "--m", "1", "--n", "5", "--seed", "4")
    assert code == 0
    path = tmp_path / "ms.mip"
    path.write_text(out)
    code, out, _ = run(capsys, "solve", str(path), "--feasibility")
    assert code == 0 and out.startswith("status")


def test_linking_facets_count(capsys):
    _, out, _ = run(capsys, "linking-facets", "--n", "3", "--format", "json")
    assert len(json.loads(out)["facets"]) == 10


@pytest.mark.parametrize("argv,code", [
    (["hull", "missing.mip"], 1),
    (["hull", "examples/ex1.mip", "--cap-points", "10"], 1),
    (["hull"], 2),
    (["bogus"], 2),
    (["hull", "examples/ex1.mip", "--format", "xml"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err
