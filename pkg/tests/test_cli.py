import json
import subprocess
import sys

import pytest

from quadindec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_golden(capsys):
    code, out, _ = run(capsys, "analyze", "46559")
    assert code == 0
    assert out == (
        '{"D": 46559, "M": 266, "N": 167, "a": 48, "cls": 3, "counterexample_corrected": true, '
        '"counterexample_stated": true, "i": 1, "r": 1, "r_of_D": "0.004634", "rank": 2, "s": 24, '
        '"ub_jk_corrected": 265, "ub_jk_stated": 265, "unit_norm": 1}\n'
    )


def test_analyze_not_squarefree(capsys):
    code, out, err = run(capsys, "analyze", "4")
    assert code == 2
    assert "not squarefree" in err and out == ""
    assert run(capsys, "analyze", "18")[0] == 2


@pytest.mark.parametrize("argv", [[], ["analyze"], ["analyze", "x"], ["analyze", "1"], ["nope"],
                                  ["scan", "--min", "2"], ["family", "d3", "--m", "-1", "--n", "0"],
                                  ["expand", "19", "--max-period", "0"],
                                  ["scan", "--min", "9", "--max", "3", "--out", "o.jsonl"]])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert err and out == ""


def test_expand(capsys):
    code, out, _ = run(capsys, "expand", "19")
    assert code == 0
    assert json.loads(out) == {"D": 19, "u0": 4, "period": [2, 1, 3, 1, 2, 8], "s": 6}


def test_expand_period_cap(capsys):
    code, _, err = run(capsys, "expand", "25982", "--max-period", "5")
    assert code == 2 and "exceeds 5" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "19", "--oracle")
    assert code == 0
    js = json.loads(out)
    assert js["ok"] and "oracle_set_equality" in {c["name"] for c in js["checks"]}


def test_verify_oracle_guard(capsys):
    code, out, err = run(capsys, "verify", "10007", "--oracle")
    assert code == 0 and "oracle skipped" in err
    assert "oracle_set_equality" not in out


def test_verify_failure_exit(capsys, monkeypatch):
    from quadindec import cli
    from quadindec.verify_suite import OracleReport

    monkeypatch.setattr(cli, "run_identity_battery",
                        lambda D, mp=None: OracleReport(D, [("determinant", False, {"i": 0})]))
    code, _, err = run(capsys, "verify", "19")
    assert code == 3 and "determinant" in err


def test_family(capsys):
    code, out, _ = run(capsys, "family", "d3", "--m", "0", "--n", "0", "--verify")
    assert code == 0
    js = json.loads(out)
    assert js["D"] == "9875167" and js["verification"]["pattern"]["passed"]


def test_family_domain(capsys):
    code, _, err = run(capsys, "family", "d2", "--m", "1", "--n", "1")
    assert code == 2 and "range" in err


def test_family_non_squarefree(capsys):
    code, out, err = run(capsys, "family", "d3", "--m", "1", "--n", "1", "--verify")
    assert code == 0 and "not squarefree" in err


def test_scan_and_summarize(capsys, tmp_path):
    out = tmp_path / "r.jsonl"
    code, stdout, _ = run(capsys, "scan", "--min", "2", "--max", "50000", "--out", str(out),
                          "--only-counterexamples", "--jobs", "2")
    assert code == 0
    line, summary = stdout.splitlines()
    js = json.loads(summary)
    assert line == " ".join(str(js[k]) for k in ("cls1_stated", "cls1_corrected", "cls2", "cls3"))
    assert js["minimal"]["cls2"] == 25982
    code, stdout, _ = run(capsys, "summarize", "--in", str(out))
    assert code == 0 and stdout.strip() == line
    code, _, _ = run(capsys, "scan", "--min", "2", "--max", "50000", "--out", str(out),
                     "--only-counterexamples", "--resume")
    assert code == 0


def test_scan_class_and_csv(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "scan", "--min", "25000", "--max", "26000", "--class", "2",
                     "--out", str(out))
    assert code == 0
    assert out.read_text().startswith("D,cls,s,N,a,M,i,r,rank,")


def test_summarize_missing(capsys, tmp_path):
    assert run(capsys, "summarize", "--in", str(tmp_path / "none.jsonl"))[0] == 1


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "quadindec", "analyze", "12441"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["M"] == 103
