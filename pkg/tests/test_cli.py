import json
from fractions import Fraction

import pytest

from qapfacets.cli import main
from qapfacets.facets import make_triple, expand_generic
from qapfacets.report import (
    inequality_from_record,
    inequality_record,
    linear_record,
    parse_rational,
    rational,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_affine_dim(capsys):
    code, rep = run(capsys, "affine-dim", "--n", "4", "--mode", "exact")
    assert code == 0
    assert rep["results"]["dimension"] == 22 and rep["schema_version"] == 1
    assert rep["mode"] == "exact"


def test_lemma_zero(capsys):
    code, rep = run(capsys, "lemma-zero", "--n", "6", "--trials", "100", "--seed", "42")
    assert code == 0 and rep["results"]["verified"] == 100 and rep["seed"] == 42


def test_certify_family(capsys):
    code, rep = run(capsys, "certify", "--n", "6", "--family", "triple", "--index", "0")
    assert code == 0 and rep["results"]["verdict"] == "facet"
    assert rep["results"]["tight_affine_dim"] == 205


def test_certify_file_and_failure(capsys, tmp_path):
    f = tmp_path / "ineq.json"
    f.write_text(json.dumps({"n": 4, "beta": 1, "coeffs": [[1, 1, 1]]}))
    code, rep = run(capsys, "certify", "--n", "4", "--ineq", str(f))
    assert code == 1 and rep["results"]["verdict"] == "valid-not-supporting"
    f.write_text(json.dumps({"n": 4, "diag": [], "off": [[1, 1, 2, 2, "-1/1"]], "constant": "0/1"}))
    code, rep = run(capsys, "certify", "--n", "4", "--ineq", str(f))
    assert code == 1 and rep["results"]["verdict"] == "invalid"


def test_gen_family(capsys):
    code, rep = run(capsys, "gen-family", "--family", "nonneg", "--n", "4", "--limit", "2")
    assert code == 0
    assert rep["results"]["count"] == 72 == rep["results"]["formula_term"]
    assert rep["results"]["inequalities"][0] == {"n": 4, "beta": 1, "coeffs": [[1, 1, 1], [2, 2, 1]]}


def test_check_equations(capsys):
    code, rep = run(capsys, "check-equations", "--n", "4")
    assert code == 0 and rep["results"]["decode_roundtrips"] == 24


def test_vertices(capsys):
    code, rep = run(capsys, "vertices", "--n", "3", "--limit", "1")
    assert code == 0 and rep["results"]["count"] == 6
    assert rep["results"]["vertices"][0]["permutation"] == [1, 2, 3]


def test_connectivity(capsys, tmp_path):
    f = tmp_path / "spec.json"
    f.write_text(json.dumps([
        {"n": 5, "mode": "lemma2", "fixed": [[1, 1]], "forbidden": [[2, [2]]]},
        {"n": 4, "mode": "free", "fixed": [[4, 4]], "forbidden": [[1, [1]], [2, [2]], [3, [3]]]},
    ]))
    code, rep = run(capsys, "connectivity", "--spec", str(f))
    graphs = rep["results"]["graphs"]
    assert code == 0
    assert graphs[0]["connected"] and not graphs[1]["connected"] and graphs[1]["components"] == 2


def test_bound_and_solve_exact(capsys, tmp_path):
    f = tmp_path / "tiny.dat"
    f.write_text("2\n0 1\n1 0\n0 2\n2 0\n")
    out = tmp_path / "rep.json"
    code, rep = run(capsys, "bound", "--instance", str(f), "--brute-force", "--out", str(out))
    assert code == 0 and rep["results"]["optimum"] == "4/1"
    assert json.loads(out.read_text())["results"] == rep["results"]
    code, rep = run(capsys, "solve-exact", "--instance", str(f))
    assert code == 0 and rep["results"]["lp_bound"] == "4/1"
    assert rep["results"]["permutation"] == [1, 2]


def test_insufficiency_small(capsys):
    code, rep = run(capsys, "insufficiency", "--n", "4")
    assert code == 0 and rep["results"]["moment_rank"] == 23
    assert rep["results"]["sss_equivalence"]["equal"]


def test_deterministic_results(capsys):
    _, a = run(capsys, "affine-dim", "--n", "5", "--mode", "modp", "--seed", "3")
    _, b = run(capsys, "affine-dim", "--n", "5", "--mode", "modp", "--seed", "3")
    assert a["results"] == b["results"]


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["affine-dim", "--n", "x"],
    ["affine-dim", "--n", "9"],
    ["bound", "--instance", "/nonexistent/file"],
    ["certify", "--n", "6", "--family", "triple"],
    ["gen-family", "--family", "triple", "--n", "4"],
    ["lemma-zero", "--n", "4", "--trials", "3"],
    ["bound", "--instance", "/nonexistent", "--cuts", "magic"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_bad_instance_file(capsys, tmp_path):
    f = tmp_path / "bad.dat"
    f.write_text("2\n0 1\n1 0\n0 2\n")
    assert main(["bound", "--instance", str(f)]) == 2
    assert "token" in capsys.readouterr().err


def test_rational_encoding():
    assert rational(Fraction(-3, 6)) == "-1/2"
    assert rational(4) == "4/1"
    assert parse_rational("7/3") == Fraction(7, 3)
    with pytest.raises(ValueError):
        parse_rational(0.5)


def test_inequality_interchange_roundtrip():
    g = make_triple(6, 0, 1, 2, 3, 4, 5)
    rec = json.loads(json.dumps(inequality_record(g, with_linear=True)))
    assert inequality_from_record(rec) == g
    lin = inequality_from_record(rec["linear"])
    assert lin == expand_generic(g)
    assert linear_record(lin) == rec["linear"]
