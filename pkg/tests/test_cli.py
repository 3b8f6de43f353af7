import json
import os
import subprocess
import sys

import pytest

from pdqubo.cli import main
from pdqubo.oracle import hungarian_distance
from pdqubo.diagrams import read_diagram
from pdqubo.qubo_io import format_qubo, read_qubo


@pytest.fixture
def files(tmp_path):
    paths = {
        "a": "0.1,0.5\n",
        "b": "0.15,0.6\n",
        "x4": "0,1\n0.2,0.9\n0.5,1.5\n0.3,0.4\n",
        "y3": "0.1,1.1\n0.25,0.8\n0.6,1.2\n",
        "empty": "",
        "bad": "0.1,0.5\n0.4,0.2\n",
        "big": "".join(f"0.{i},1.{i}\n" for i in range(5)),
    }
    out = {}
    for name, text in paths.items():
        p = tmp_path / f"{name}.csv"
        p.write_text(text)
        out[name] = str(p)
    out["dir"] = tmp_path
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def summary(text):
    return dict(line.split(" ", 1) for line in text.splitlines())


def test_wasserstein_check_oracle_single_points(files, capsys):
    code, out, _ = run(capsys, "wasserstein", files["a"], files["b"], "--exact", "--check-oracle")
    assert code == 0
    s = summary(out)
    ref = hungarian_distance(read_diagram(files["a"]), read_diagram(files["b"]))
    assert float(s["distance"]) == pytest.approx(ref.distance, abs=1e-12)
    assert float(s["cost"]) == pytest.approx(float(ref.cost), abs=1e-12)
    assert s["method"] == "exhaustive" and s["constraint_violations"] == "0"


def test_pd2qubo_four_by_three(files, capsys):
    out = files["dir"] / "w.qubo"
    code, _, _ = run(capsys, "pd2qubo", files["x4"], files["y3"], "-o", out)
    assert code == 0
    assert read_qubo(out).num_vars == 19
    assert len((files["dir"] / "w.qubo.map").read_text().splitlines()) == 19


def test_pd2qubo_to_stdout(files, capsys):
    code, out, _ = run(capsys, "pd2qubo", files["a"], files["b"], "--map", files["dir"] / "m.map")
    assert code == 0 and out.splitlines()[1] == "qubo 3"
    assert (files["dir"] / "m.map").exists()


def test_oracle_empty(files, capsys):
    code, out, _ = run(capsys, "oracle", files["empty"], files["empty"])
    assert code == 0
    assert summary(out) == {"cost": "0.0", "distance": "0.0"}


def test_oracle_methods_agree(files, capsys):
    _, brute, _ = run(capsys, "oracle", files["x4"], files["y3"], "--method", "brute", "--p", "1", "--q", "inf")
    _, hung, _ = run(capsys, "oracle", files["x4"], files["y3"], "--p", "1", "--q", "inf")
    assert brute.splitlines()[:2] == hung.splitlines()[:2]
    assert "x0 -> " in brute


def test_json_summary(files, capsys):
    code, out, _ = run(capsys, "wasserstein", files["x4"], files["y3"], "--json")
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"cost", "distance", "n_vars", "method", "constraint_violations"}
    assert data["n_vars"] == 19 and data["method"] == "exhaustive"
    ref = hungarian_distance(read_diagram(files["x4"]), read_diagram(files["y3"]))
    assert data["distance"] == pytest.approx(ref.distance, abs=1e-9)


def test_default_switches_to_annealing_above_cap(files, capsys):
    code, out, err = run(capsys, "wasserstein", files["big"], files["big"], "--json", "--reads", "50", "--sweeps", "200")
    data = json.loads(out)
    assert code == 0 and data["method"] == "anneal" and data["n_vars"] == 35
    assert "--seed" in err  # default seed is logged


def test_exit_codes(files, capsys):
    code, _, err = run(capsys, "oracle", files["bad"], files["a"])
    assert code == 1 and "bad.csv:2" in err
    code, _, err = run(capsys, "oracle", files["dir"] / "missing.csv", files["a"])
    assert code == 1 and "missing.csv" in err
    code, _, err = run(capsys, "wasserstein", files["big"], files["big"], "--exact")
    assert code == 2 and "cap" in err
    code, _, err = run(capsys, "wasserstein", files["a"], files["b"], "--gamma", "-1")
    assert code == 1 and "gamma" in err
    code, _, err = run(capsys, "pd2qubo", files["a"], files["b"], "-o", files["dir"] / "nodir" / "x.qubo")
    assert code == 1 and "--output" in err
    with pytest.raises(SystemExit) as info:
        main(["oracle", files["a"], files["b"], "--p", "abc"])
    assert info.value.code == 1


def test_embedding_failure_exit_code(files, capsys):
    k5 = files["dir"] / "k5.qubo"
    k5.write_text("qubo 5\n" + "".join(f"{i} {j} 1\n" for i in range(5) for j in range(i + 1, 5)))
    code, _, err = run(capsys, "embed", "--qubo", k5, "--rows", 1, "--cols", 1, "--shore", 1, "--seed", 0, "--tries", 2)
    assert code == 3 and "no embedding" in err


def test_pipeline(files, capsys):
    d = files["dir"]
    qubo = d / "w.qubo"
    run(capsys, "pd2qubo", files["x4"], files["b"], "-o", qubo)
    text = qubo.read_text()
    assert format_qubo(read_qubo(qubo), "\n".join(l[2:] for l in text.splitlines() if l.startswith("#"))) == text

    code, out, _ = run(capsys, "solve", qubo, "--reads", 100, "--seed", 7, "--histogram", d / "h.csv")
    assert code == 0
    rows = [json.loads(l) for l in out.splitlines()]
    assert sum(r["count"] for r in rows) == 100
    assert [r["energy"] for r in rows] == sorted(r["energy"] for r in rows)
    hist = (d / "h.csv").read_text().splitlines()
    assert hist[0] == "energy,occurrences"

    code, out, _ = run(capsys, "solve", qubo, "--exact")
    assert code == 0 and float(json.loads(out)["energy"]) == pytest.approx(rows[0]["energy"])

    code, out, _ = run(capsys, "embed", "--qubo", qubo, "--rows", 2, "--cols", 2, "--shore", 4,
                       "--seed", 1, "--emit-embedded-qubo", d / "e.qubo")
    assert code == 0
    chains = json.loads(out.splitlines()[0])
    assert sorted(map(int, chains)) == list(range(read_qubo(qubo).num_vars))
    assert out.splitlines()[1].startswith("max_chain ")
    assert read_qubo(d / "e.qubo").num_vars == 32


def test_reverse_needs_initial(files, capsys):
    qubo = files["dir"] / "w.qubo"
    run(capsys, "pd2qubo", files["a"], files["b"], "-o", qubo)
    code, _, err = run(capsys, "solve", qubo, "--schedule", "reverse")
    assert code == 1 and "--initial" in err
    code, _, err = run(capsys, "solve", qubo, "--schedule", "reverse", "--initial", "01")
    assert code == 1 and "--initial" in err
    code, out, _ = run(capsys, "solve", qubo, "--schedule", "reverse", "--initial", "100", "--reads", 5, "--seed", 0)
    assert code == 0 and json.loads(out.splitlines()[0])["state"] == "100"


def test_gen_chimera(files, capsys):
    code, out, _ = run(capsys, "gen-chimera", "--rows", 1, "--cols", 2, "--shore", 2)
    assert code == 0 and len(out.splitlines()) == 2 * 4 + 2


def test_atomic_write_leaves_no_temporaries(files, capsys):
    run(capsys, "gen-chimera", "--rows", 2, "--cols", 2, "--shore", 2, "-o", files["dir"] / "c.txt")
    assert not [p for p in os.listdir(files["dir"]) if p.startswith(".tmp-")]


def test_quiet_silences_info(files, capsys):
    _, _, err = run(capsys, "pd2qubo", files["a"], files["b"], "--quiet")
    assert err == ""


def test_console_script(files):
    proc = subprocess.run(
        [sys.executable, "-m", "pdqubo.cli", "oracle", files["a"], files["empty"]],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("cost ")
