import json
import os
import subprocess
import sys

import pytest

from radonlab.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_region_example(capsys):
    code, out, _ = call(capsys, "region", "--which", "t2", "--p", "7/4", "--q", "7/3")
    assert code == 0
    doc = json.loads(out)
    assert doc["member"] is True and len(doc["constraints"]) == 3


def test_region_conj_requires_lambda(capsys):
    code, _, err = call(capsys, "region", "--which", "conj-i", "--p", "2", "--q", "3")
    assert code == 2 and "lambda" in err
    code, out, _ = call(capsys, "region", "--which", "conj-i", "--d", "2", "--p", "3/2", "--q", "3",
                        "--lambda", "1/2")
    assert code == 0 and json.loads(out)["member"] is True


def test_mean_value_example(capsys):
    code, out, _ = call(capsys, "mean-value", "--d", "1", "--m", "1", "--n", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "d,m,N,J,norm,wall_ms"
    assert lines[1].split(",")[:4] == ["1", "1", "5", "5"]


def test_mean_value_brute_check(capsys):
    code, out, _ = call(capsys, "mean-value", "--d", "2", "--m", "2", "--n", "3,5,7", "--brute-check")
    assert code == 0
    assert [r.split(",")[3] for r in out.splitlines()[1:]] == ["15", "45", "91"]


def test_usage_errors(capsys):
    assert call(capsys, "improving", "--poly", "0,0,1", "--p", "8/5", "--dual", "--n", "8,4")[0] == 2
    assert call(capsys, "improving", "--poly", "0,0,1", "--p", "8/5", "--dual", "--n", "8",
                "--trials", "3")[0] == 2
    assert call(capsys, "transfer", "--quad", "1,-1,0")[0] == 2
    assert call(capsys, "region", "--which", "t2", "--p", "1/2", "--q", "2")[0] == 2
    assert call(capsys, "mean-value", "--d", "2", "--m", "4", "--n", "100", "--budget", "1000")[0] == 2
    assert call(capsys, "lift", "--poly", "0,1/2", "--n", "3", "--seed", "1")[0] == 2
    with pytest.raises(SystemExit) as e:
        run(["no-such-command"])
    assert e.value.code == 2


def test_improving_reproducible(capsys):
    argv = ["improving", "--poly", "0,0,1", "--p", "8/5", "--dual", "--n", "8,16,32", "--trials", "50",
            "--seed", "7"]
    c1, a, _ = call(capsys, *argv)
    c2, b, _ = call(capsys, *argv)
    assert c1 == c2 == 0 and a == b
    rows = a.splitlines()
    assert rows[0] == "N,p,q,best_ratio,family,slope_so_far"
    assert len(rows) == 4 and rows[1].endswith(",")


def test_config_merge_flags_win(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 2, "m": 2, "n": [3, 4], "format": "json"}))
    code, out, _ = call(capsys, "mean-value", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0 and [r["N"] for r in doc["rows"]] == [3, 4]
    code, out, _ = call(capsys, "mean-value", "--config", str(cfg), "--n", "5")
    doc = json.loads(out)
    assert [r["N"] for r in doc["rows"]] == [5] and doc["config"]["n"] == "5"
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert call(capsys, "mean-value", "--config", str(bad))[0] == 2
    assert call(capsys, "mean-value", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, stdout, _ = call(capsys, "sharpness", "--poly", "0,0,1", "--p", "3/2", "--q", "3", "--n", "4,8",
                           "--out", str(out))
    assert code == 0 and stdout == ""
    text = out.read_bytes()
    assert text.startswith(b"family,N,witness,predicted,error,ok\n") and b"\r" not in text


def test_assertion_failure_exit_one(capsys):
    code, _, err = call(capsys, "sharpness", "--poly", "0,0,1", "--p", "3/2", "--q", "3", "--n", "4",
                        "--tol", "-1")
    assert code == 1
    witness = json.loads(err.splitlines()[0])
    assert witness["check"] == "family"


@pytest.mark.parametrize("argv", [
    ["transfer", "--quad", "2,3,1", "--p", "8/5", "--n", "4,8", "--trials", "5", "--seed", "1"],
    ["lift", "--poly", "0,0,0,1", "--n", "2,3", "--trials", "2", "--seed", "3"],
    ["fractional", "--lambda", "3/5", "--n", "4,16", "--trials", "3", "--seed", "1"],
    ["sparse", "--q", "8/3", "--nmax", "8", "--corpus", "3", "--seed", "5"],
    ["sharpness", "--dim", "2", "--p", "9/5", "--dual", "--n", "4,8"],
])
def test_commands_succeed_and_repeat(argv, capsys):
    c1, a, _ = call(capsys, *argv)
    c2, b, _ = call(capsys, *argv)
    assert c1 == 0 and c2 == 0 and a == b and a.count("\n") >= 2


def test_threads_env_and_entry_point(tmp_path):
    env = dict(os.environ, RADONLAB_THREADS="2")
    outs = []
    for _ in range(2):
        r = subprocess.run([sys.executable, "-m", "radonlab", "mean-value", "--d", "2", "--m", "3",
                            "--n", "6,8", "--format", "json"], capture_output=True, text=True, env=env)
        assert r.returncode == 0, r.stderr
        doc = json.loads(r.stdout)
        for row in doc["rows"]:
            row.pop("wall_ms")
        outs.append(doc)
    assert outs[0] == outs[1]
    assert [row["J"] for row in outs[0]["rows"]] == [1032, 2744]
