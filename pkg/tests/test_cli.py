import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from covartail import copulas as cp
from covartail.cli import main

REPO = Path(__file__).resolve().parent.parent
DATA = Path(__file__).resolve().parent / "data"


def run_cli(args, cwd=REPO):
    proc = subprocess.run([sys.executable, "-m", "covartail.cli"] + args,
                          capture_output=True, text=True, cwd=cwd)
    return proc.returncode, proc.stdout, proc.stderr


def write_pairs(path, u, v, header=("u", "v")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a, b in zip(u, v):
            w.writerow([f"{a:.10g}", f"{b:.10g}"])


class TestLimits:
    def test_clayton_example(self, capsys):
        rc = main(["limits", "--family", "clayton", "--theta", "1",
                   "--q", "0.5", "--p", "0.1", "--format", "json"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert float(out["v_qp_asymptotic"]) == pytest.approx(0.1)
        assert float(out["v_qp_exact"]) == pytest.approx(1.0 / 11.0, rel=1e-9)

    def test_limit_calculator_example(self, capsys):
        rc = main(["limits", "--kappa", "2", "--xi", "0", "--format", "json"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["delta_covar_limit"] == 0.0

    def test_missing_flags_exit_2(self):
        assert main(["limits"]) == 2

    def test_invalid_param_exit_2(self):
        assert main(["limits", "--family", "clayton", "--theta", "-3",
                     "--q", "0.5", "--p", "0.1"]) == 2

    def test_unknown_subcommand_exits_2(self):
        rc, _, _ = run_cli(["frobnicate"])
        assert rc == 2


class TestEstimate:
    def test_comonotone_floor(self, tmp_path):
        n = 3000
        u = (np.arange(n) + 1.0) / (n + 1.0)
        write_pairs(tmp_path / "in.csv", u, u)
        rc = main(["estimate", "--input", str(tmp_path / "in.csv"),
                   "--out-dir", str(tmp_path), "--k", "100"])
        assert rc == 0
        out = json.loads((tmp_path / "summary.json").read_text())
        assert out["regime"] == "attraction"
        assert out["r_hat"] == pytest.approx(0.05, abs=0.01)  # near the floor p
        assert out["lambda_hat"] == 1.0

    def test_independence_balance(self, tmp_path):
        s = cp.sample(cp.independence(), 5000, seed=2)
        write_pairs(tmp_path / "in.csv", s.u, s.v, header=("z_i", "z_s"))
        rc = main(["estimate", "--input", str(tmp_path / "in.csv"),
                   "--out-dir", str(tmp_path), "--k", "100"])
        assert rc == 0
        out = json.loads((tmp_path / "summary.json").read_text())
        assert out["regime"] == "balance"
        assert 0.6 < out["r_hat"] < 1.6

    def test_non_numeric_cell_names_location(self, tmp_path):
        (tmp_path / "bad.csv").write_text("u,v\n0.5,0.25\n0.7,oops\n")
        rc, _, err = run_cli(["estimate", "--input", str(tmp_path / "bad.csv"),
                              "--out-dir", str(tmp_path)])
        assert rc == 4
        assert ":3:" in err and "column 3" in err

    def test_insufficient_rows(self, tmp_path):
        (tmp_path / "tiny.csv").write_text("u,v\n0.5,0.25\n0.7,0.5\n")
        rc, _, err = run_cli(["estimate", "--input", str(tmp_path / "tiny.csv"),
                              "--out-dir", str(tmp_path), "--k", "100"])
        assert rc == 4

    def test_missing_input_is_io_error(self, tmp_path):
        rc, _, _ = run_cli(["estimate", "--input", str(tmp_path / "nope.csv"),
                            "--out-dir", str(tmp_path)])
        assert rc == 3


class TestAnalyze:
    def test_window_larger_than_data(self, tmp_path):
        rc, _, err = run_cli(["analyze", "--input", "tests/data/synthetic_pair.csv",
                              "--window", "99999", "--out-dir", str(tmp_path)])
        assert rc == 4 and "window" in err

    def test_bad_date_exit_4(self, tmp_path):
        (tmp_path / "d.csv").write_text(
            "date,value_i,value_s\n2020-01-01,0.1,0.2\n01/02/2020,0.3,0.1\n")
        rc, _, err = run_cli(["analyze", "--input", str(tmp_path / "d.csv"),
                              "--window", "2", "--out-dir", str(tmp_path)])
        assert rc == 4 and "ISO-8601" in err

    def test_unwritable_outdir_exit_3(self):
        rc, _, _ = run_cli(["analyze", "--input", "tests/data/synthetic_pair.csv",
                            "--out-dir", "/proc/covartail-denied"])
        assert rc == 3

    def test_all_windows_failing_exit_5(self, tmp_path):
        n = 300
        rows = ["date,value_i,value_s"]
        for i in range(n):
            rows.append(f"2020-01-{(i % 28) + 1:02d},{'nan' if i == 5 else 0.1 * ((i % 7) - 3)},0.2")
        (tmp_path / "nan.csv").write_text("\n".join(rows) + "\n")
        rc, _, err = run_cli(["analyze", "--input", str(tmp_path / "nan.csv"),
                              "--window", "300", "--out-dir", str(tmp_path)])
        assert rc == 5


class TestConfigFile:
    def test_config_defaults_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"q": 0.25, "p": 0.2, "family": "clayton",
                                   "theta": 1.0, "format": "json"}))
        rc = main(["limits", "--config", str(cfg)])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert float(out["q"]) == 0.25 and float(out["p"]) == 0.2
        rc = main(["limits", "--config", str(cfg), "--q", "0.75"])
        out = json.loads(capsys.readouterr().out)
        assert float(out["q"]) == 0.75  # flag overrides the file

    def test_malformed_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("not json")
        assert main(["limits", "--config", str(cfg), "--kappa", "2"]) == 4


class TestGoldenArtifacts:
    def test_clayton_linked_pair_amplifies_in_every_window(self):
        # the shipped synthetic pair is Clayton-linked, so every flag-free
        # window shows negative delta-CoVaR and an attraction regime
        path = DATA / "golden" / "analyze" / "report.csv"
        rows = [r for r in path.read_text().splitlines() if not r.startswith("#")]
        header = rows[0].split(",")
        i_dcv = header.index("delta_covar")
        i_regime = header.index("regime")
        body = [r.split(",") for r in rows[1:]]
        assert len(body) >= 2
        for row in body:
            assert float(row[i_dcv]) < 0.0
            assert row[i_regime] == "attraction"


class TestReproducibility:
    def test_simulate_rerun_byte_identical(self, tmp_path):
        args = ["simulate", "--family", "clayton", "--theta", "1",
                "--n-grid", "400", "--reps", "2", "--k-rule", "fixed:30",
                "--seed", "5"]
        rc1, _, _ = run_cli(args + ["--out-dir", str(tmp_path / "a")])
        rc2, _, _ = run_cli(args + ["--out-dir", str(tmp_path / "b")])
        assert rc1 == rc2 == 0
        assert (tmp_path / "a/report.csv").read_bytes() == (tmp_path / "b/report.csv").read_bytes()
        assert (tmp_path / "a/summary.json").read_bytes() == (tmp_path / "b/summary.json").read_bytes()

    def test_outputs_embed_config_and_seed(self, tmp_path):
        rc, _, _ = run_cli(["simulate", "--family", "frank", "--theta", "1",
                            "--deterministic-only", "--seed", "9",
                            "--out-dir", str(tmp_path)])
        assert rc == 0
        head = (tmp_path / "report.csv").read_text().splitlines()[:2]
        assert head[0].startswith("# covartail simulate-report v1")
        embedded = json.loads(head[1].split("# config: ", 1)[1])
        assert embedded["seed"] == 9 and embedded["family"] == "frank"
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["config"]["seed"] == 9
