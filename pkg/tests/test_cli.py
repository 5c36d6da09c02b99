import json
import shutil
import subprocess
import sys
from math import comb, factorial

import pytest

from conewalks import cli
from conewalks.verify import IdentityCheck


def call(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# enumerate

def test_enumerate_endpoint(capsys):
    code, out, _ = call(capsys, "enumerate", "--model", "king", "--region", "three-quadrant",
                        "--end", "-1,0", "--n", "5")
    assert code == 0 and out == "0,1,2,17,80,536\n"


def test_enumerate_total(capsys):
    code, out, _ = call(capsys, "enumerate", "--model", "king", "--region", "three-quadrant",
                        "--total", "--n", "2")
    assert code == 0 and out == "1,7,50\n"


def test_enumerate_csv_and_json(capsys):
    _, out, _ = call(capsys, "enumerate", "--total", "--n", "3", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == cli.version_line() == "# conewalks 0.1.0"
    assert lines[1:] == ["n,count", "0,1", "1,7", "2,50", "3,369"]
    _, out, _ = call(capsys, "enumerate", "--total", "--n", "3", "--format", "json")
    assert json.loads(out) == ["1", "7", "50", "369"]


def test_enumerate_quadrant_and_models(capsys):
    _, out, _ = call(capsys, "enumerate", "--region", "quadrant", "--total", "--n", "4")
    assert out == "1,3,18,105,684\n"
    _, out, _ = call(capsys, "enumerate", "--model", "tandem", "--total", "--n", "4")
    assert out == "1,3,8,22,65\n"
    _, out, _ = call(capsys, "enumerate", "--edge-rule", "allow", "--total", "--n", "3")
    assert out == "1,7,52,385\n"


def test_enumerate_weighted_start(capsys):
    _, out, _ = call(capsys, "enumerate", "--start", "A", "--end", "-1,0", "--n", "3")
    assert out == "0,1,2,17\n"


def test_enumerate_crt(capsys):
    _, exact, _ = call(capsys, "enumerate", "--total", "--n", "25")
    _, crt, _ = call(capsys, "enumerate", "--total", "--n", "25", "--primes", "-1", "--threads", "2")
    assert exact == crt


def test_prime_schedule_env(capsys, monkeypatch):
    monkeypatch.setenv("WALKS_PRIME_SCHEDULE", "1000003,1000033")
    code, out, _ = call(capsys, "enumerate", "--end", "-1,0", "--n", "5", "--primes", "2")
    assert code == 0 and out == "0,1,2,17,80,536\n"


def test_custom_model_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"name": "mine", "steps": [[1, 0], [-1, 0], [0, 1], [0, -1]],
                                "edge_rule": "forbid"}))
    _, out, _ = call(capsys, "enumerate", "--model", str(path), "--total", "--n", "4")
    assert out == "1,4,14,54,200\n"


def test_out_file(capsys, tmp_path):
    path = tmp_path / "seq.csv"
    code, out, _ = call(capsys, "enumerate", "--total", "--n", "2", "--out", str(path))
    assert code == 0 and out == "" and path.read_text() == "1,7,50\n"


# ---------------------------------------------------------------------------
# usage errors exit with 2

@pytest.mark.parametrize("argv", [
    ["enumerate", "--n", "3"],                                    # neither --end nor --total
    ["enumerate", "--total", "--end", "0,0", "--n", "3"],
    ["enumerate", "--total", "--n", "3", "--model", "nosuch"],
    ["enumerate", "--total", "--n", "3", "--region", "disc"],
    ["enumerate", "--end", "-1,-1", "--n", "3"],                  # outside the cone
    ["enumerate", "--end", "x", "--n", "3"],
    ["verify", "--identity", "nosuch"],
    ["verify", "--identity", "reflection", "--start", "-1,-1"],
    ["closed-form", "--name", "nosuch"],
    ["asymptotics", "--series", "elsewhere", "--n", "10"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2 and err


# ---------------------------------------------------------------------------
# verify

def test_verify_reflection(capsys):
    code, out, _ = call(capsys, "verify", "--identity", "reflection", "--model", "king",
                        "--start", "0,0", "--n", "10")
    assert code == 0 and json.loads(out)["status"] == "pass"


def test_verify_kernel(capsys):
    code, out, _ = call(capsys, "verify", "--identity", "kernel", "--order", "10")
    assert code == 0
    assert all(json.loads(line)["first_failure"] is None for line in out.splitlines())


def test_verify_failure_exit(capsys, monkeypatch):
    import conewalks.verify as verify

    def failing(identity, model, N, start, edge_rule=None):
        return IdentityCheck(identity, "king", "three-quadrant", N, N + 4, False,
                             {"n": 1, "i": 0, "j": 0, "delta": 1})
    monkeypatch.setattr(verify, "run_identity", failing)
    code, out, _ = call(capsys, "verify", "--identity", "functional-C", "--n", "4")
    assert code == 1 and json.loads(out)["status"] == "fail"


# ---------------------------------------------------------------------------
# closed-form, guess, asymptotics

def test_closed_form(capsys):
    _, out, _ = call(capsys, "closed-form", "--name", "C-1,0", "--order", "5")
    assert json.loads(out) == ["0", "1", "2", "17", "80", "536"]
    _, out, _ = call(capsys, "closed-form", "--name", "U1", "--x0", "2", "--order", "3")
    assert json.loads(out)[:3] == ["0", "0", "2"]


def test_guess_catalan(capsys, tmp_path):
    path = tmp_path / "cat.csv"
    path.write_text("n,value\n" + "".join(f"{k},{comb(2 * k, k) // (k + 1)}\n" for k in range(40)))
    code, out, _ = call(capsys, "guess", "--input", str(path), "--dF", "2", "--dt", "1")
    assert code == 0
    terms = {tuple(k): v for k, v in json.loads(out)["terms"]}
    assert set(terms) == {(0, 0), (0, 1), (1, 2)}
    code, out, _ = call(capsys, "guess", "--input", str(path), "--prime", "auto")
    assert code == 0 and json.loads(out)["prime"] is not None


def test_guess_no_candidate(capsys, tmp_path):
    path = tmp_path / "fact.txt"
    path.write_text(",".join(str(factorial(k)) for k in range(30)))
    code, _, err = call(capsys, "guess", "--input", str(path), "--dF", "1", "--dt", "1")
    assert code == 1 and "no candidate" in err


def test_asymptotics_small(capsys):
    code, out, _ = call(capsys, "asymptotics", "--series", "total", "--n", "300")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# conewalks")
    assert any(line.startswith("# fit:") for line in lines)
    assert "n,observed_over_8n,predicted_over_8n,relative_deviation" in lines
    code, out, _ = call(capsys, "asymptotics", "--series", "origin", "--n", "300", "--format", "json")
    assert json.loads(out)["prediction"]["exponent"] == "-5/3"


def test_selftest_subset(capsys):
    code, out, _ = call(capsys, "selftest", "--only", "1,9a")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines() if line.startswith("[")] == ["[PASS]", "[PASS]"]


# ---------------------------------------------------------------------------
# reproducibility and the installed entry points

def test_byte_identical_outputs(tmp_path):
    args = ["enumerate", "--total", "--n", "12", "--format", "csv"]
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        assert cli.run(args + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "conewalks", "enumerate", "--end", "-1,0", "--n", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "0,1,2,17,80,536\n"


@pytest.mark.skipif(shutil.which("conewalks") is None, reason="console script not on PATH")
def test_console_script():
    res = subprocess.run(["conewalks", "enumerate", "--total", "--n", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "1,7,50\n"
    bad = subprocess.run(["conewalks", "enumerate", "--n", "2"], capture_output=True, text=True)
    assert bad.returncode == 2
