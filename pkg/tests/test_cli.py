import json
import math

import numpy as np
import pytest

from frustop import cli
from frustop.disorder import BondConfig
from frustop.topology import Report


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def gen(tmp_path, capsys, name, *argv):
    path = tmp_path / name
    code, _, err = run(capsys, "gen", *argv, "-o", str(path))
    assert code == 0, err
    return path


def test_gen_bond_count_and_determinism(tmp_path, capsys):
    a = gen(tmp_path, capsys, "a.json", "--extents", "8", "8", "--x", "0.5", "--seed", "1")
    doc = json.loads(a.read_text())
    assert doc["bonds"]["n_bonds"] == 144
    assert doc["manifest"]["command"] == "gen" and doc["manifest"]["seed"] == 1
    first = a.read_bytes()
    gen(tmp_path, capsys, "a.json", "--extents", "8", "8", "--x", "0.5", "--seed", "1")
    assert a.read_bytes() == first
    assert doc["manifest"]["argv"][0] == "gen"


def test_replay(tmp_path, capsys):
    a = gen(tmp_path, capsys, "a.json", "--extents", "3", "3", "--x", "0.4", "--seed", "9")
    first = a.read_bytes()
    a.write_text("")
    assert run(capsys, "replay", str(a))[0] == 2
    a.write_bytes(first)
    assert run(capsys, "replay", str(a))[0] == 0 and a.read_bytes() == first
    code, out, _ = run(capsys, "percolate", "--strip", "2", "--trials", "50", "--csv")
    m = tmp_path / "p.csv"
    m.write_text(out)
    assert run(capsys, "replay", str(m))[1] == out


def test_global_seed_before_subcommand(tmp_path, capsys):
    a = tmp_path / "a.json"
    assert cli.main(["--seed", "5", "gen", "--extents", "3", "3", "-o", str(a)]) == 0
    assert json.loads(a.read_text())["manifest"]["seed"] == 5


def test_gen_all_positive(tmp_path, capsys):
    p = gen(tmp_path, capsys, "p.json", "--extents", "4", "4", "--x", "1")
    assert (BondConfig.from_dict(json.loads(p.read_text())["bonds"]).signs == 1).all()


def test_analyze(tmp_path, capsys):
    p = gen(tmp_path, capsys, "p.json", "--extents", "4", "4", "--x", "1")
    code, out, _ = run(capsys, "analyze", str(p))
    assert code == 0 and json.loads(out)["result"]["frustrated"] == 0
    f = gen(tmp_path, capsys, "fig2.json", "--named", "fig2")
    res = json.loads(run(capsys, "analyze", str(f))[1])["result"]
    assert res["frustrated"] == 6 and len(res["pairs"]) == 3


def test_analyze_random_fraction(tmp_path, capsys):
    p = gen(tmp_path, capsys, "r.json", "--extents", "40", "40", "--x", "0.5", "--seed", "3")
    res = json.loads(run(capsys, "analyze", str(p))[1])["result"]
    n = res["n_plaquettes"]
    assert abs(res["frustrated_fraction"] - 0.5) <= 4 * math.sqrt(0.25 / n)


def test_gs(tmp_path, capsys):
    p = gen(tmp_path, capsys, "p.json", "--extents", "3", "3", "--x", "1")
    code, out, _ = run(capsys, "gs", str(p))
    res = json.loads(out)["result"]
    assert code == 0 and res["degeneracy"] == 2 and res["interface_identity"] is True
    q = tmp_path / "q.json"
    doc = json.loads(p.read_text())
    doc["lattice"]["extents"] = [1, 1]
    doc["bonds"] = BondConfig(np.array([1, 1, 1, -1])).to_dict()
    q.write_text(json.dumps(doc))
    res = json.loads(run(capsys, "gs", str(q))[1])["result"]
    assert res["degeneracy"] == 8 and res["energy"]["numerator"] == -2


def test_gs_cap_is_usage_error(tmp_path, capsys):
    p = gen(tmp_path, capsys, "p.json", "--extents", "5", "5")
    code, _, err = run(capsys, "gs", str(p))
    assert code == 2 and "cap" in err


def test_verify_torus_and_empty(tmp_path, capsys):
    t = gen(tmp_path, capsys, "t.json", "--named", "torus")
    code, out, _ = run(capsys, "verify", str(t))
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    reports = {r["name"]: r for r in doc["instances"][0]["reports"]}
    assert reports["duality"]["dims"]["H^1(N)"] == 2
    assert reports["linking parity"]["dims"]["no_spanning_surface"] == 2
    p = gen(tmp_path, capsys, "p.json", "--extents", "3", "3", "--x", "1")
    assert run(capsys, "verify", str(p))[0] == 0


def test_verify_corpus_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "corpus")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and len(doc["instances"]) == 15


def test_verify_failure_exit_code(tmp_path, capsys, monkeypatch):
    def broken(*args, **kwargs):
        rep = Report("homology exact sequence")
        rep.add("forced failure", False)
        return rep

    monkeypatch.setattr(cli, "verify_homology_exactness", broken)
    p = gen(tmp_path, capsys, "p.json", "--extents", "2", "2")
    assert run(capsys, "verify", str(p))[0] == 1


def test_percolate_strip(capsys):
    code, out, _ = run(capsys, "percolate", "--mode", "strip", "--strip", "3", "--x", "0.5", "1.0",
                       "--trials", "100000", "--seed", "2")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, l.split(","))) for l in lines[1:]]
    half, one = rows
    assert abs(float(half["estimate"]) - 0.125) <= 4 * float(half["stderr"])
    assert half["bound"] == "1/8" and half["exact"] == "1/8"
    assert float(one["estimate"]) == 1.0 and one["bound"] == "0"


def test_percolate_x_range_bounds(capsys):
    code, out, _ = run(capsys, "percolate", "--strip", "2", "--x-range", "0.3", "0.7", "0.1", "--trials", "10", "--json")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 5
    from fractions import Fraction
    for r in rows:
        x = Fraction(str(r["x"]))
        assert Fraction(r["bound"]) == (2 * x * (1 - x)) ** 2


def test_percolate_cluster_mode(capsys):
    code, out, _ = run(capsys, "percolate", "--mode", "unfrustrated-plaquettes", "--extents", "6", "6",
                       "--x", "1.0", "--trials", "2")
    assert code == 0 and "np." not in out
    assert out.splitlines()[2].split(",")[8] == "1.0"


def test_percolate_is_byte_identical(capsys):
    argv = ["percolate", "--mode", "negative-bonds", "--sizes", "3", "4", "--extents", "3", "3", "3", "--x", "0.4",
            "--trials", "3", "--seed", "7"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [["bogus"], ["gen", "--extents", "0", "2"], ["percolate", "--x", "1.5"],
                                  ["percolate", "--mode", "negative-bonds"], ["verify"],
                                  ["gen", "--extents", "3", "3", "--x", "2"]])
def test_usage_errors_exit_2(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_missing_and_malformed_files(tmp_path, capsys):
    assert run(capsys, "analyze", str(tmp_path / "none.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "analyze", str(bad))[0] == 2
    bad.write_text(json.dumps({"lattice": {"d": 2, "extents": [2, 2]}, "bonds": {"n_bonds": 3, "signs": ""}}))
    assert run(capsys, "gs", str(bad))[0] == 2
