import json
import subprocess
import sys

import pytest

from k3pic.cli import main
from k3pic.fixtures import default_fixture_text, dump_fixtures, parse_fixtures
from k3pic.errors import FixtureError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_analyze_e8_u(capsys):
    code, d = run_json(capsys, "analyze", "1", "6", "14", "21")
    assert code == 0
    assert d["rank"]["rho"] == 10 and d["rank"]["matrix_dim"] == 13
    good = [c for c in d["pic_candidates"] if "det" in c]
    assert good and all(c["form"]["group"] == [] for c in good)
    assert good[0]["det"] == -1


def test_analyze_dot(capsys, tmp_path):
    path = tmp_path / "graph.dot"
    code, out, _ = run(capsys, "analyze", "2", "4", "5", "9", "--dot", str(path))
    assert code == 0
    dot = path.read_text()
    vertices = [line for line in dot.splitlines() if "[label=" in line and "--" not in line]
    dashed = [line for line in vertices if 'style="dashed"' in line]
    assert len(vertices) == 22 and len(dashed) == 5
    assert "E~7" in out and "5xA~1" in out


def test_analyze_invalid_weights(capsys):
    code, _, err = run(capsys, "analyze", "1", "1", "1", "0")
    assert code == 2 and "invalid input" in err


def test_analyze_without_fibration(capsys):
    code, d = run_json(capsys, "analyze", "1", "1", "1", "1")
    assert code == 0 and d["rank"]["rho"] == 1
    assert d["fibrations_found"] == 0 and d["fibration_note"]
    assert d["pic_candidates"] == []


def test_polytope(capsys):
    code, d = run_json(capsys, "polytope", "1", "1", "1", "1")
    assert code == 0 and d["num_points"] == 35 and d["reflexive"] is True
    assert d["boundary"]["interior"] == 1


def test_lattice_disc(capsys):
    code, d = run_json(capsys, "lattice", "T(2,3,7)", "disc")
    assert code == 0 and d["det"] == -1 and abs(d["formula"]) == 1
    code, d = run_json(capsys, "lattice", "[[0,1],[1,0]]", "disc")
    assert d["det"] == -1


def test_lattice_form(capsys):
    code, d = run_json(capsys, "lattice", "U", "form")
    assert code == 0 and d["group"] == []
    code, d = run_json(capsys, "lattice", "E7", "form")
    assert d["label"] == "w(2,1,1)"


def test_lattice_overlattices(capsys):
    code, d = run_json(capsys, "lattice", "E7 + A1^5", "overlattices")
    assert code == 0
    assert len(d["classes"]) == 3
    labels = {c["q_M"] for c in d["classes"]}
    assert "u(1)+v(1)" in labels
    for c in d["classes"]:
        assert abs(c["det"]) * c["order"] ** 2 == 64


def test_lattice_isotropic_form(capsys):
    code, d = run_json(capsys, "lattice", "u(1)", "isotropic")
    assert code == 0 and len(d["classes"]) == 1


def test_lattice_iso(capsys):
    code, d = run_json(capsys, "lattice", "E8 + D9 + U", "iso", "E8^2 + <-4> + U")
    assert code == 0 and d["form_isomorphic"] and d["same_rank"] and d["same_det"]
    code, d = run_json(capsys, "lattice", "v(1)+w(2,1,-1)+w(2,1,1)", "iso", "u(1)+v(1)")
    assert d["form_isomorphic"] is False


@pytest.mark.parametrize("argv", [["lattice", "D3", "form"], ["lattice", "E8 +", "disc"],
                                  ["lattice", "[[1,2],[3", "disc"], ["lattice", "U", "iso"]])
def test_lattice_bad_input(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_mirror_scan(capsys):
    code, d = run_json(capsys, "mirror-scan")
    assert code == 0
    assert d["partners"]["14"] == [14, 28, 45, 51]
    assert d["partners"]["2"] == []
    assert len(d["matrix"]) == 95
    assert set(d["differences"]) == {"1", "5", "19", "52", "56", "69", "73", "88"}


def test_regress_full(capsys):
    code, d = run_json(capsys, "regress")
    assert code == 0 and d["failures"] == 0
    assert len(d["results"]) == 95
    assert all(r["checks"][0]["ok"] for r in d["results"])


def test_regress_tampered(capsys, tmp_path):
    recs = json.loads(default_fixture_text())
    recs[0]["rank"] = 2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(recs))
    code, d = run_json(capsys, "regress", str(path))
    assert code == 1 and d["failures"] == 1
    (bad,) = [r for r in d["results"] if not r["ok"]]
    assert bad["id"] == 1


def test_regress_bad_fixture(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("[{not json")
    assert run(capsys, "regress", str(path))[0] == 4
    path.write_text(json.dumps([{"id": 1, "weights": [1, 1, 1, 1]}]))
    assert run(capsys, "regress", str(path))[0] == 4
    assert run(capsys, "regress", str(tmp_path / "missing.json"))[0] == 4


def test_regress_worked_examples(capsys):
    code, d = run_json(capsys, "regress", "--only", "26,65,19")
    assert code == 0
    assert [r["id"] for r in d["results"]] == [19, 26, 65]
    for r in d["results"]:
        assert len(r["checks"]) > 3
        assert all(c["ok"] for c in r["checks"])


def test_regress_deterministic(capsys):
    _, a = run(capsys, "regress", "--json", "--only", "1,2,3,4,5,26")[:2]
    _, b = run(capsys, "regress", "--json", "--only", "1,2,3,4,5,26")[:2]
    _, c = run(capsys, "regress", "--json", "--only", "1,2,3,4,5,26", "--jobs", "2")[:2]
    assert a == b == c


def test_fixture_round_trip():
    text = default_fixture_text()
    recs = parse_fixtures(text)
    assert len(recs) == 95
    assert dump_fixtures(recs) == text
    assert dump_fixtures(parse_fixtures(dump_fixtures(recs))) == text


def test_fixture_errors():
    with pytest.raises(FixtureError):
        parse_fixtures("{}")
    recs = json.loads(default_fixture_text())
    with pytest.raises(FixtureError):
        parse_fixtures(json.dumps(recs[:5]))
    recs[3]["weights"] = [1, 1, 1]
    with pytest.raises(FixtureError):
        parse_fixtures(json.dumps(recs))


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "k3pic", "lattice", "A1", "form"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "w(2,1,-1)" in out.stdout
