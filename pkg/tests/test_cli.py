import json
import subprocess
import sys

import pytest

from barrier_forests import cli, oracle

THREE = "node a 4\nnode b 1\nnode c 2\nedge a b 5\nedge b c 4\n"
THREE_ARCS = "node a\nnode b\nnode c\narc a b 1\narc b a 4\narc b c 3\narc c b 2\n"
# consistent triangle from loops 0,1,2 and edges ab=3, bc=4, ac=5
TRIANGLE = "node a\nnode b\nnode c\narc a b 3\narc b a 2\narc b c 3\narc c b 2\narc a c 5\narc c a 3\n"


@pytest.fixture
def write(tmp_path):
    def _write(text, name="g.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_msf_three_basin(capsys, write):
    code, out, _ = run(capsys, "msf", write(THREE), "--verify")
    assert code == 0
    r = json.loads(out)
    assert [x["phi"] for x in r["phi"]] == [0.0, 1.0, 3.0]
    assert [(e["k"], e["absorbed"], e["survivor"], e["a"], e["b"]) for e in r["events"]] == [
        (3, "a", "b", "a", "b"),
        (2, "c", "b", "c", "b"),
    ]
    assert [e["increment"] for e in r["events"]] == [1.0, 2.0]


def test_msf_single_level(capsys, write):
    code, out, _ = run(capsys, "msf", write(THREE), "--k", "3")
    r = json.loads(out)
    assert code == 0 and r["forests"] == [{"arcs": [], "k": 3, "roots": ["a", "b", "c"], "weight": 0.0}]
    assert run(capsys, "msf", write(THREE), "--k", "0")[0] == 2
    assert run(capsys, "msf", write(THREE), "--k", "two")[0] == 2


def test_msf_output_is_deterministic(capsys, write, tmp_path):
    path = write(THREE)
    out1, out2 = tmp_path / "1.json", tmp_path / "2.json"
    assert cli.main(["msf", path, "-o", str(out1)]) == 0
    assert cli.main(["msf", path, "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    code, out, _ = run(capsys, "msf", path, "--timing")
    assert "run_seconds" in json.loads(out)["timing"]


def test_barrier_input_gives_same_hierarchy(capsys, write):
    _, a, _ = run(capsys, "msf", write(THREE))
    _, b, _ = run(capsys, "msf", write(THREE_ARCS, "arcs.txt"))
    ra, rb = json.loads(a), json.loads(b)
    for key in ("events", "phi", "forests"):
        assert ra[key] == rb[key]


def test_msf_dot(capsys, write):
    code, out, _ = run(capsys, "msf", write(THREE), "--format", "dot", "--k", "1")
    assert code == 0
    assert out.startswith("digraph forest_1 {")
    assert '"c" -> "b" [label="2"];' in out


def test_msf_disconnected_warns(capsys, write):
    code, out, err = run(capsys, "msf", write("node a 1\nnode b 2\nnode c 0\nedge a b 3\n"))
    assert code == 0
    assert "warning" in err
    r = json.loads(out)
    assert not r["complete"] and [x["k"] for x in r["phi"]] == [3, 2]
    assert run(capsys, "msf", write("node a 1\nnode b 2\nnode c 0\nedge a b 3\n"), "--k", "1")[0] == 3


def test_msf_verify_skips_large(capsys, write, monkeypatch):
    monkeypatch.setenv(oracle.ENV_MAX_N, "2")
    code, _, err = run(capsys, "msf", write(THREE), "--verify")
    assert code == 0 and "skipped" in err


def test_exit_codes(capsys, write, tmp_path):
    assert run(capsys, "msf", str(tmp_path / "none.txt"))[0] == 2
    assert run(capsys, "msf", write("node a 1\nedge a b 1\n"))[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "msf")[0] == 2
    bad = TRIANGLE.replace("arc c a 3", "arc c a 3.5")
    code, _, err = run(capsys, "msf", write(bad))
    assert code == 3 and "breaks" in err


def test_mst(capsys, write):
    code, out, _ = run(capsys, "mst", write(THREE))
    r = json.loads(out)
    assert code == 0 and r["root"] == "b" and r["weight"] == 3.0
    assert r["weight_by_root"] == {"a": 6.0, "b": 3.0, "c": 4.0}
    code, out, _ = run(capsys, "mst", write(THREE), "--root", "a")
    assert json.loads(out)["weight"] == 6.0
    code, out, _ = run(capsys, "mst", write("node z 1\n"))
    assert json.loads(out)["weight"] == 0.0 and json.loads(out)["arcs"] == []
    assert run(capsys, "mst", write(THREE), "--root", "q")[0] == 2
    assert run(capsys, "mst", write("node a 1\nnode b 2\n"))[0] == 3


def test_verify(capsys, write):
    code, out, _ = run(capsys, "verify", write(THREE))
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 15 and all(line.startswith("PASS") for line in lines)
    assert run(capsys, "verify", write("node a 0\n"))[0] == 0
    assert run(capsys, "verify", write(TRIANGLE))[0] == 0
    code, _, err = run(capsys, "verify", write(TRIANGLE.replace("arc c a 3", "arc c a 3.5")))
    assert code == 3 and "arc pair" in err
    assert run(capsys, "verify", write(THREE), "--max-n", "2")[0] == 2


def test_verify_reports_failure(capsys, write, monkeypatch):
    from barrier_forests import verify

    monkeypatch.setattr(verify, "check_nested_edges", lambda inst: ["broken on purpose"])
    code, out, err = run(capsys, "verify", write(THREE))
    assert code == 4
    assert "FAIL  nested-edges" in out and "broken on purpose" in out
    assert "nested-edges" in err


def test_roadplan(capsys, write):
    code, out, _ = run(capsys, "roadplan", write(THREE), "--budget", "2")
    r = json.loads(out)
    assert code == 0
    assert [(x["from"], x["to"]) for x in r["roads"]] == [("a", "b"), ("c", "b")]
    assert [x["effective_cost"] for x in r["roads"]] == [1.0, 2.0]
    assert [x["direct_cost"] for x in r["roads"]] == [5.0, 4.0]
    assert r["connects_all"] and "note" in r
    code, out, _ = run(capsys, "roadplan", write(THREE), "--budget", "0")
    assert json.loads(out)["roads"] == []
    assert run(capsys, "roadplan", write(THREE), "--budget", "3")[0] == 2
    assert run(capsys, "roadplan", write(THREE_ARCS), "--budget", "1")[0] == 2
    assert run(capsys, "roadplan", write("node a 1\nnode b 2\nnode c 0\nedge a b 3\n"), "--budget", "2")[0] == 3


def test_roadplan_equal_values_is_greedy(capsys, write):
    text = "node a 0\nnode b 0\nnode c 0\nnode d 0\nedge a b 3\nedge b c 1\nedge c d 2\nedge a d 5\n"
    _, out, _ = run(capsys, "roadplan", write(text), "--budget", "3")
    assert [x["direct_cost"] for x in json.loads(out)["roads"]] == [1.0, 2.0, 3.0]


def test_ingest1d(capsys, write):
    rows = ["x,P"] + [f"{x},{v}" for x, v in enumerate([3, 0, 2, -1, 3])]
    code, out, _ = run(capsys, "ingest1d", write("\n".join(rows), "s.csv"))
    doc = json.loads(out)
    assert code == 0 and len(doc["nodes"]) == 2
    assert doc["edges"] == [{"a": "m0", "b": "m1", "p": 2.0}]
    assert [n["x"] for n in doc["nodes"]] == [1.0, 3.0]
    code, out, _ = run(capsys, "ingest1d", write("0,3\n1,2\n2,1\n", "m.csv"))
    assert len(json.loads(out)["nodes"]) == 1
    triple = "\n".join(f"{x},{v}" for x, v in enumerate([5, 1, 4, 0, 3, 2, 6]))
    code, out, _ = run(capsys, "ingest1d", write(triple, "t.csv"))
    assert len(json.loads(out)["nodes"]) == 3


def test_ingest1d_output_feeds_msf(capsys, write, tmp_path):
    out = tmp_path / "g.json"
    assert cli.main(["ingest1d", write("0,3\n1,0\n2,2\n3,-1\n4,3\n", "s.csv"), "-o", str(out)]) == 0
    code, text, _ = run(capsys, "msf", str(out))
    assert code == 0 and json.loads(text)["phi"][-1]["phi"] == 2.0


def test_ingest1d_errors(capsys, write):
    assert run(capsys, "ingest1d", write("0,1\n1,x\n", "a.csv"))[0] == 2
    assert run(capsys, "ingest1d", write("0,1,2\n", "b.csv"))[0] == 2
    assert run(capsys, "ingest1d", write("0,1\n1,0\n", "c.csv"))[0] == 2


def test_module_entry_point(write):
    proc = subprocess.run(
        [sys.executable, "-m", "barrier_forests", "mst", write(THREE)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["root"] == "b"


def test_msf_verify_mismatch_exits_4(capsys, write, monkeypatch):
    real = oracle.phi_table

    def skewed(V, budget=None):
        phi, forests = real(V, budget)
        phi[1] += 0.5
        return phi, forests

    monkeypatch.setattr(oracle, "phi_table", skewed)
    code, _, err = run(capsys, "msf", write(THREE), "--verify")
    assert code == 4 and "phi^1" in err
