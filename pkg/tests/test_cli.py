import json
import subprocess
import sys

import pytest

from sumprod.cli import main, sha256_file
from sumprod.intset import interval, load, make_set, save


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_dyadic(capsys, workdir):
    code, out, _ = run(capsys, "construct", "dyadic", "--limit", "1000000", "--out", "T.spb")
    assert code == 0
    T = load("T.spb")
    assert T.capacity == 10**6 and 0 in T and 2 in T and 3 not in T
    doc = json.loads((workdir / "T.spb.manifest.json").read_text())
    assert doc["schema"] == "manifest_v1" and doc["tool"] == "sumprod"
    assert doc["artifacts"][0]["sha256"] == sha256_file("T.spb")
    assert doc["command"][:2] == ["construct", "dyadic"]


def test_construct_thm_ub(capsys, workdir):
    code, out, _ = run(capsys, "construct", "thm-ub", "--k", "2", "--limit", "200000", "--out", "A.spb")
    assert code == 0 and "n0 = " in out
    doc = json.loads((workdir / "A.spb.manifest.json").read_text())
    assert doc["report"]["coverage"]["missing_count"] == 0
    assert (workdir / "A.spb.defect.csv").read_text().startswith("t,missing_count,missing_fraction\n")


def test_bad_kind_is_usage_error(capsys):
    code, _, err = run(capsys, "construct", "nonsense", "--out", "x.spb")
    assert code == 1 and "usage" in err


def test_construct_failure_exit_2(capsys):
    code, _, err = run(capsys, "construct", "alphabeta", "--alpha", "0.2", "--beta", "0.5",
                       "--out", "x.spb")
    assert code == 1 and "1 - beta <= alpha" in err
    code, _, err = run(capsys, "construct", "thm53-level", "--eps", "0.25", "--limit", "1000000",
                       "--out", "x.spb")
    assert code == 2 and "shortfall" in err


def test_sample_deterministic(capsys):
    run(capsys, "sample", "--c", "2.0", "--seed", "7", "--limit", "100000", "--out", "a.spb")
    run(capsys, "sample", "--c", "2.0", "--seed", "7", "--limit", "100000", "--out", "b.spb")
    assert sha256_file("a.spb") == sha256_file("b.spb")
    run(capsys, "sample", "--c", "2.0", "--seed", "8", "--limit", "100000", "--out", "c.spb")
    assert sha256_file("a.spb") != sha256_file("c.spb")


def test_sample_lambda(capsys):
    code, out, _ = run(capsys, "sample", "--c", "0.5", "--limit", "10")
    assert code == 0
    lam = float(out.split("lambda = ")[1].split()[0])
    assert lam == pytest.approx(2.312, abs=1e-3)


def test_sample_rejects_negative_c(capsys):
    assert run(capsys, "sample", "--c", "-1")[0] == 1


def test_verify(capsys):
    run(capsys, "construct", "dyadic", "--limit", "10000000", "--out", "T.spb")
    code, out, _ = run(capsys, "verify", "--expr", "2*A+A", "--sets", "A=T.spb",
                       "--limit", "10000000", "--report", "cov.csv")
    assert code == 0 and out.strip() == "COVERED"
    save(make_set(range(0, 1001, 2), 1000), "E.spb")
    code, out, _ = run(capsys, "verify", "--expr", "A+A", "--sets", "A=E.spb", "--limit", "1000")
    assert code == 2 and out.startswith("GAPS 500") and "first gap 1" in out
    assert run(capsys, "verify", "--expr", "A++", "--sets", "A=E.spb", "--limit", "1000")[0] == 1
    assert run(capsys, "verify", "--expr", "A+B", "--sets", "A=E.spb", "--limit", "1000")[0] == 1


def test_stats(capsys, workdir):
    code, out, _ = run(capsys, "stats", "--model", "c=0.5", "--n-from", "10", "--n-to", "10")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "n,dec_count,R_n,mu_exact,mu_divisor_form,delta,janson"
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["mu_exact"]) == pytest.approx(0.01117, abs=1e-5)
    code, _, _ = run(capsys, "stats", "--model", "c=0.5", "--n-from", "10", "--n-to", "9",
                     "--out", "empty.csv")
    assert code == 0
    assert (workdir / "empty.csv").read_text() == \
        "n,dec_count,R_n,mu_exact,mu_divisor_form,delta,janson\n"


def test_stats_delta_cap(capsys):
    code, _, err = run(capsys, "stats", "--model", "c=2", "--n-from", "100", "--n-to", "101",
                       "--delta", "--delta-cap", "50")
    assert code == 2 and "--force" in err
    with pytest.warns(RuntimeWarning, match="above cap"):
        code, _, _ = run(capsys, "stats", "--model", "c=2", "--n-from", "100", "--n-to", "101",
                         "--delta", "--delta-cap", "50", "--force")
    assert code == 0


def test_stats_on_set(capsys):
    save(interval(0, 100), "I.spb")
    code, out, _ = run(capsys, "stats", "--set", "I.spb", "--n-from", "20", "--n-to", "20")
    assert code == 0 and out.splitlines()[1].startswith("20,")


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.count("PASS") == 3
    code, out, _ = run(capsys, "selftest", "--inject-fault", "lem41")
    assert code == 2 and "FAIL lem41" in out


def test_replay(capsys, workdir):
    run(capsys, "sample", "--c", "1.0", "--seed", "3", "--limit", "50000", "--out", "s.spb")
    code, out, _ = run(capsys, "replay", "s.spb.manifest.json")
    assert code == 0 and "REPRODUCED" in out
    save(make_set([1], 10), "s.spb")
    doc = json.loads((workdir / "s.spb.manifest.json").read_text())
    doc["command"] = ["construct", "dyadic", "--limit", "10", "--out", "s.spb"]
    (workdir / "m.json").write_text(json.dumps(doc))
    code, out, _ = run(capsys, "replay", "m.json")
    assert code == 2 and "MISMATCH s.spb" in out


def test_config_and_flag_precedence(capsys, workdir):
    (workdir / "run.cfg").write_text("# sample run\nc = 2.0\nlimit = 1000\nseed = 5\n")
    code, out, _ = run(capsys, "--config", "run.cfg", "sample", "--out", "a.spb")
    assert code == 0 and load("a.spb").capacity == 1000
    code, out, _ = run(capsys, "--config", "run.cfg", "sample", "--limit", "2000", "--out", "b.spb")
    assert load("b.spb").capacity == 2000
    doc = json.loads((workdir / "b.spb.manifest.json").read_text())
    assert doc["config"]["seed"] == 5 and doc["config"]["c"] == 2.0
    (workdir / "bad.cfg").write_text("bogus = 1\n")
    assert run(capsys, "--config", "bad.cfg", "sample", "--c", "1")[0] == 1


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "sumprod.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "sumprod" in out.stdout
