import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hardy_lt.cli import main, read_potential, resolve_config
from hardy_lt.core import ProblemParams
from hardy_lt.groundstate import c1_from_c_hgn
from hardy_lt.scf import evaluate_candidate

ORACLE_C1 = 0.0363031899178


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("opt") / "run"
    assert main(["optimize", "--d", "3", "--s", "1", "--N", "1", "--c", "critical", "--out", str(out)]) == 0
    return out


def load(path):
    with open(path) as fh:
        return json.load(fh)


class TestOptimize:
    def test_artifacts(self, run_dir):
        names = set(os.listdir(run_dir))
        assert {"manifest.json", "potential.csv", "levels.json", "trace.csv"} <= names
        man = load(run_dir / "manifest.json")
        assert man["summary"]["converged"]
        assert man["summary"]["C_hat"] == pytest.approx(ORACLE_C1, rel=1e-3)
        assert set(man["files"]) == {"potential.csv", "levels.json", "trace.csv"}
        assert man["config"]["c"] == "critical" and man["version"]
        with open(run_dir / "potential.csv") as fh:
            assert fh.readline().strip() == "t,r,V"
        with open(run_dir / "trace.csv") as fh:
            assert fh.readline().strip() == "iteration,objective,residual,alpha"
        levels = load(run_dir / "levels.json")
        assert levels == [{"lambda": levels[0]["lambda"], "ell": 0, "index": 0, "multiplicity_slot": 0}]

    def test_csv_round_trip(self, run_dir):
        V = read_potential(run_dir / "potential.csv")
        S, _ = evaluate_candidate(V, ProblemParams(3))
        assert S == pytest.approx(load(run_dir / "manifest.json")["summary"]["C_hat"], rel=1e-12)

    def test_rerun_is_identical(self, run_dir, tmp_path):
        out = tmp_path / "again"
        assert main(["optimize", "--d", "3", "--out", str(out)]) == 0
        assert (out / "levels.json").read_text() == (run_dir / "levels.json").read_text()
        a = load(out / "manifest.json")["summary"]
        b = load(run_dir / "manifest.json")["summary"]
        assert a["C_hat"] == b["C_hat"] and a["levels"] == b["levels"]

    def test_bad_dimension(self, tmp_path, capsys):
        assert main(["optimize", "--d", "2", "--out", str(tmp_path / "x")]) == 64
        assert "d must be ≥ 3" in capsys.readouterr().err
        assert not (tmp_path / "x").exists()

    def test_non_convergence_exit(self, tmp_path):
        out = tmp_path / "short"
        assert main(["optimize", "--max-iters", "2", "--out", str(out)]) == 2
        assert load(out / "manifest.json")["summary"]["converged"] is False


class TestConfig:
    def test_file_and_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nd = 4\ns = 0.5\nmax-iters = 7\ngrid = -10, 5, 301\nc = critical\n")
        rc, _ = resolve_config(["optimize", "--config", str(cfg), "--s", "2"])
        assert (rc.d, rc.s, rc.max_iters, rc.grid, rc.c) == (4, 2.0, 7, (-10.0, 5.0, 301), "critical")

    @pytest.mark.parametrize("text", ["bogus = 1\n", "d 3\n", "grid = 1,2\n", "c = loud\n", "N = 0\n"])
    def test_malformed(self, tmp_path, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 64

    def test_missing_file(self, tmp_path):
        assert main(["optimize", "--config", str(tmp_path / "nope.cfg")]) == 66

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["optimize", "--grid", "5,1,100"],
                                      ["optimize", "--c", "0.3"], ["spectrum"]])
    def test_usage(self, argv):
        assert main(argv) == 64


class TestOracle:
    def test_report(self, tmp_path):
        out = tmp_path / "oracle"
        assert main(["oracle", "--d", "3", "--s", "1", "--out", str(out)]) == 0
        rep = load(out / "ground_report.json")
        assert abs(rep["lambda1_check"] + 1) <= 1e-6
        assert c1_from_c_hgn(rep["C_HGN"], ProblemParams(3)) == pytest.approx(rep["C1"], rel=1e-12)
        with open(out / "groundstate.csv") as fh:
            assert fh.readline().strip() == "t,w,Q,V"
        assert (out / "manifest.json").exists()

    def test_bracket_failure_exit(self, tmp_path, monkeypatch):
        import hardy_lt.groundstate as gsmod

        monkeypatch.setattr(gsmod, "_shoot", lambda a, *args, **kw: (1, None))
        assert main(["oracle", "--grid=-10,5,500", "--out", str(tmp_path / "o")]) == 3


class TestVerify:
    def test_stored_run(self, run_dir):
        assert main(["verify", "--run", str(run_dir)]) == 0
        rep = load(run_dir / "verify_report.json")
        assert rep["all_passed"]
        assert {"normalization", "hardy_positivity", "scaling_invariance", "padding_monotonicity",
                "dense_oracle", "gap", "decay", "duality", "flat_comparison"} <= set(rep["checks"])

    @pytest.mark.parametrize("N", [1, 2])
    def test_fresh(self, tmp_path, N):
        out = tmp_path / f"v{N}"
        assert main(["verify", "--N", str(N), "--out", str(out)]) == 0
        checks = load(out / "verify_report.json")["checks"]
        assert all(c["status"] == "pass" for c in checks.values())

    def test_tampered(self, run_dir, tmp_path):
        bad = tmp_path / "tampered"
        bad.mkdir()
        for name in ("manifest.json", "levels.json", "trace.csv"):
            (bad / name).write_bytes((run_dir / name).read_bytes())
        with open(run_dir / "potential.csv") as src, open(bad / "potential.csv", "w", newline="") as dst:
            rows = list(csv.reader(src))
            w = csv.writer(dst, lineterminator="\n")
            w.writerow(rows[0])
            for t, r, v in rows[1:]:
                w.writerow([t, r, repr(2.0 * float(v))])
        assert main(["verify", "--run", str(bad)]) == 1
        rep = load(bad / "verify_report.json")
        assert rep["checks"]["normalization"]["status"] == "fail"
        assert "normalization" in rep["failed"]

    def test_duality_outside_range(self, tmp_path):
        out = tmp_path / "v"
        main(["verify", "--N", "2", "--s", "0.5", "--out", str(out)])
        duality = load(out / "verify_report.json")["checks"]["duality"]
        assert duality["status"] == "skipped: validity range"

    def test_missing(self, tmp_path):
        assert main(["verify", "--run", str(tmp_path / "absent")]) == 66


class TestSweep:
    def test_rank_sweep(self, tmp_path):
        out = tmp_path / "sweep"
        assert main(["sweep", "--N-list", "1,2,3", "--out", str(out)]) == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [int(r["N"]) for r in rows] == [1, 2, 3]
        C = [float(r["C_hat"]) for r in rows]
        assert all(b >= a - 1e-10 for a, b in zip(C, C[1:]))
        assert all(r["converged"] == "True" for r in rows)
        assert (out / "manifest.json").exists() and (out / "cells").is_dir()

    def test_coupling_sweep(self, tmp_path):
        out = tmp_path / "sweep_c"
        main(["sweep", "--c-list", "0,0.125,critical", "--out", str(out)])
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["c"]) for r in rows] == [0.0, 0.125, 0.25]
        C = [float(r["C_hat"]) for r in rows]
        assert C[0] < C[1] < C[2]

    def test_failed_cells_carry_codes(self, tmp_path):
        out = tmp_path / "sweep_f"
        assert main(["sweep", "--s-list", "1,0.5", "--c-list", "0", "--max-iters", "40",
                     "--out", str(out)]) == 2
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        failed = [r for r in rows if r["converged"] != "True"]
        assert failed and all(r["failure_code"] for r in failed)
        assert all(r["C_hat"] == "" for r in failed if r["failure_code"] == "no_bound_states")

    def test_empty_list(self, tmp_path):
        assert main(["sweep", "--N-list", "", "--out", str(tmp_path / "e")]) == 64
        assert main(["sweep", "--out", str(tmp_path / "e")]) == 64


def test_coupling_monotone_on_fixed_potential(run_dir):
    V = read_potential(run_dir / "potential.csv")
    vals = [evaluate_candidate(V, ProblemParams(3, c=c))[0] for c in (0.0, 0.125, 0.25)]
    assert vals[0] <= vals[1] <= vals[2]


def test_spectrum(run_dir, capsys):
    assert main(["spectrum", "--potential", str(run_dir / "potential.csv")]) == 0
    out = capsys.readouterr().out
    assert "ell" in out and "-0.0363" in out
    assert main(["spectrum", "--potential", str(run_dir / "missing.csv")]) == 66


def test_console_script(tmp_path):
    exe = os.path.join(os.path.dirname(sys.executable), "hardy-lt")
    cmd = [exe] if os.path.exists(exe) else [sys.executable, "-m", "hardy_lt.cli"]
    res = subprocess.run(cmd + ["optimize", "--d", "2"], capture_output=True, text=True)
    assert res.returncode == 64
