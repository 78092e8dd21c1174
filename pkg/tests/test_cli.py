"""End-to-end tests of the command line interface.

Each test drives ``roughfut.cli.main`` in process with a temp output
directory, asserting on exit codes, file contents, and the run manifest.
The bundled fixtures under data/ are exercised the same way a user would.
"""

import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from roughfut import __version__
from roughfut.cli import main

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def simulate_args(out, n_paths=2000, extra=()):
    return ["simulate", "--model", "rbergomi", "--h", "0.3", "--eta", "1.5",
            "--rho", "-0.3", "--n-paths", str(n_paths), "--mesh", "60",
            "--horizon", "0.5", "--out-dir", str(out), *extra]


class TestExitCodes:
    def test_missing_model_is_usage_error(self, tmp_path, capsys):
        rc = main(["simulate", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "--model" in capsys.readouterr().err

    def test_positive_rho_rejected(self, tmp_path, capsys):
        rc = main(["simulate", "--model", "rbergomi", "--h", "0.3",
                   "--eta", "1.5", "--rho", "0.2", "--out-dir",
                   str(tmp_path)])
        assert rc == 2
        err = capsys.readouterr().err.lower()
        assert "negative" in err or "rho" in err or "correlation" in err

    def test_missing_required_param(self, tmp_path, capsys):
        rc = main(["simulate", "--model", "rbergomi", "--eta", "1.5",
                   "--rho", "-0.3", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "h" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"no-such-flag": 1}))
        rc = main(simulate_args(tmp_path, extra=["--config", str(cfg)]))
        assert rc == 2
        assert "no-such-flag" in capsys.readouterr().err

    def test_missing_quotes_file(self, tmp_path, capsys):
        rc = main(["calibrate", "--quotes", str(tmp_path / "nope.csv"),
                   "--family", "rbergomi", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "nope.csv" in capsys.readouterr().err

    def test_malformed_quotes_is_runtime_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n")
        rc = main(["calibrate", "--quotes", str(bad), "--family",
                   "rbergomi", "--out-dir", str(tmp_path)])
        assert rc == 3
        assert "header" in capsys.readouterr().err

    def test_empty_a_list_samuelson(self, tmp_path):
        rc = main(["samuelson", "--model", "rbergomi", "--h", "0.3",
                   "--eta", "1.0", "--rho", "-0.1", "--a", "",
                   "--tfut", "0.5", "--topt", "0.1,0.2",
                   "--out-dir", str(tmp_path)])
        assert rc == 2

    def test_bad_strike_grid(self, tmp_path, capsys):
        rc = main(["price", "--model", "rbergomi", "--h", "0.3", "--eta",
                   "1.5", "--rho", "-0.3", "--topt", "0.25", "--tfut", "0.3",
                   "--strike-grid", "0.8:1.2", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "0.8:1.2" in capsys.readouterr().err

    def test_topt_after_tfut(self, tmp_path):
        rc = main(["price", "--model", "rbergomi", "--h", "0.3", "--eta",
                   "1.5", "--rho", "-0.3", "--topt", "0.5", "--tfut", "0.25",
                   "--n-paths", "100", "--out-dir", str(tmp_path)])
        assert rc == 2

    def test_hurst_requires_an_input(self, tmp_path, capsys):
        rc = main(["hurst", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "--rv" in capsys.readouterr().err

    def test_version_exits_cleanly(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out


class TestSimulate:
    def test_summary_and_manifest(self, tmp_path):
        rc = main(simulate_args(tmp_path, extra=["--seed", "7"]))
        assert rc == 0
        header, rows = read_csv(tmp_path / "summary.csv")
        assert header == ["mesh", "t", "mean_s", "se_s", "mean_v"]
        last = rows[-1]
        assert abs(float(last[2]) - 1.0) < 0.05
        manifest = read_json(tmp_path / "manifest.json")
        assert manifest["command"] == ["simulate"]
        assert manifest["version"] == __version__
        assert manifest["seed"] == 7
        assert manifest["config"]["n_paths"] == 2000
        for absent in ("threads", "out_dir", "config"):
            assert absent not in manifest["config"]

    def test_dump_paths_row_count(self, tmp_path):
        rc = main(simulate_args(tmp_path, n_paths=50,
                                extra=["--dump-paths", "--dump-limit", "7"]))
        assert rc == 0
        _, summary_rows = read_csv(tmp_path / "summary.csv")
        _, path_rows = read_csv(tmp_path / "paths.csv")
        assert len(path_rows) == 7 * len(summary_rows)
        assert len({r[1] for r in path_rows}) == 7

    def test_dual_mesh_requires_maturities(self, tmp_path, capsys):
        rc = main(["simulate", "--model", "rbergomi", "--h", "0.3",
                   "--eta", "1.5", "--rho", "-0.3", "--mesh", "100:50",
                   "--n-paths", "100", "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "maturities" in capsys.readouterr().err

    def test_threads_flag_is_inert(self, tmp_path):
        outs = []
        for threads in ("1", "3"):
            out = tmp_path / f"t{threads}"
            rc = main(simulate_args(out, n_paths=500,
                                    extra=["--threads", threads]))
            assert rc == 0
            outs.append(out)
        assert (outs[0] / "summary.csv").read_bytes() == \
               (outs[1] / "summary.csv").read_bytes()
        manifests = [read_json(o / "manifest.json") for o in outs]
        for m in manifests:
            m.pop("wall_time_seconds")
        assert manifests[0] == manifests[1]


class TestPrice:
    def test_default_grid_gives_nine_row_smile(self, tmp_path):
        rc = main(["price", "--model", "rbergomi", "--h", "0.3", "--eta",
                   "1.5", "--rho", "-0.3", "--topt", "0.25", "--tfut", "0.3",
                   "--f0", "50", "--n-paths", "4000", "--mesh", "120",
                   "--strike-grid", "0.8:1.2:9", "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "smile.csv")
        assert header == ["strike", "price", "stderr", "implied_vol",
                          "converged"]
        assert len(rows) == 9
        strikes = [float(r[0]) for r in rows]
        assert strikes == pytest.approx(list(np.linspace(0.8, 1.2, 9) * 50))
        vols = [float(r[3]) for r in rows]
        assert all(0.0 < v < 2.0 for v in vols)

    def test_config_file_overrides_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n-paths": 800, "seed": 9}))
        rc = main(["price", "--model", "rbergomi", "--h", "0.3", "--eta",
                   "1.5", "--rho", "-0.3", "--topt", "0.25", "--tfut", "0.3",
                   "--n-paths", "100", "--mesh", "120",
                   "--config", str(cfg), "--out-dir", str(tmp_path)])
        assert rc == 0
        manifest = read_json(tmp_path / "manifest.json")
        assert manifest["config"]["n_paths"] == 800
        assert manifest["seed"] == 9
        assert str(cfg) in manifest["inputs"]


class TestSamuelson:
    def test_grid_shape_and_columns(self, tmp_path):
        rc = main(["samuelson", "--model", "rbergomi", "--h", "0.3",
                   "--eta", "0.8", "--rho", "-0.1", "--a", "0,1",
                   "--tfut", "0.5", "--topt", "0.1:0.4:3",
                   "--n-paths", "2000", "--mesh", "120",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "samuelson.csv")
        assert header == ["a", "t_opt", "atm_vol"]
        assert len(rows) == 6
        assert [float(r[0]) for r in rows] == [0, 0, 0, 1, 1, 1]
        assert [float(r[1]) for r in rows[:3]] == pytest.approx([0.1, 0.25,
                                                                 0.4])


class TestHurstCli:
    def test_bundled_fbm_fixture_recovers_h(self, tmp_path):
        rc = main(["hurst", "--rv", str(DATA / "fbm_h010_rv.csv"),
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        result = read_json(tmp_path / "hurst.json")
        assert 0.07 <= result["h"] <= 0.13
        assert result["pooled"] is True
        header, rows = read_csv(tmp_path / "scatter.csv")
        assert header == ["q", "delta", "log_delta", "log_m", "contract"]
        assert len(rows) > 50

    def test_rv_and_intraday_are_exclusive(self, tmp_path, capsys):
        rc = main(["hurst", "--rv", str(DATA / "fbm_h010_rv.csv"),
                   "--intraday", str(DATA / "fbm_h010_rv.csv"),
                   "--out-dir", str(tmp_path)])
        assert rc == 2


class TestCalibrateCli:
    def test_bundled_fixture_beats_threshold(self, tmp_path):
        meta = read_json(DATA / "synthetic_rbergomi_meta.json")
        fit = meta["reference_fit"]
        rc = main(["calibrate", "--quotes",
                   str(DATA / meta["quotes_file"]),
                   "--family", meta["generator"]["family"],
                   "--n-paths", str(fit["n_paths"]),
                   "--mesh", f"{fit['mesh'][0]}:{fit['mesh'][1]}",
                   "--global-budget", str(fit["global_budget"]),
                   "--local-budget", str(fit["local_budget"]),
                   "--seed", str(fit["seed"]),
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        result = read_json(tmp_path / "result.json")
        assert result["loss"]["total"] <= meta["loss_threshold"]
        smile0 = read_csv(tmp_path / "smile_0.csv")[1]
        assert len(smile0) == 5
        manifest = read_json(tmp_path / "manifest.json")
        assert any(p.endswith("synthetic_rbergomi_quotes.csv")
                   for p in manifest["inputs"])


class TestSelftest:
    def test_single_check_runs(self, capsys):
        rc = main(["selftest", "--only", "black-inversion"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "[PASS] black-inversion" in out
        assert "1/1 checks passed" in out

    def test_unknown_check_is_usage_error(self, capsys):
        rc = main(["selftest", "--only", "not-a-check"])
        assert rc == 2
        assert "not-a-check" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "roughfut", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert __version__ in proc.stdout
