import csv
import io
import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from betaperturb.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, read_configurations
from betaperturb.errors import ParseError
from betaperturb.numerics import arg_half_period_array
from betaperturb.verify import FAULT_ENV

GAUSS30 = ["--ensemble", "gauss", "--beta", "2", "--n", "30", "--l", "1", "--trials", "1", "--seed", "7"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSample:
    def test_gauss30_csv(self, capsys):
        code, out, _ = run(["sample"] + GAUSS30, capsys)
        assert code == EXIT_OK
        assert out.splitlines()[0] == "trial,l,k,re,im"
        data = rows(out)
        assert len(data) == 30
        z = np.array([complex(float(r["re"]), float(r["im"])) for r in data])
        assert abs(np.sum(arg_half_period_array(z)) - math.pi / 4) <= 1e-9

    def test_json_matches_csv(self, capsys):
        _, out_csv, _ = run(["sample"] + GAUSS30, capsys)
        _, out_json, _ = run(["sample"] + GAUSS30 + ["--format", "json"], capsys)
        doc = json.loads(out_json)
        assert doc["meta"]["ensemble"] == "gauss"
        assert doc["meta"]["n"] == 30
        z_json = [complex(re_, im) for re_, im in doc["trials"][0]["z"]]
        z_csv = [complex(float(r["re"]), float(r["im"])) for r in rows(out_csv)]
        assert z_json == z_csv
        assert doc["trials"][0]["zero_count"] == 0

    def test_byte_identical(self, tmp_path, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["sample", "--ensemble", "laguerre", "--beta", "1", "--n", "4", "--m", "6",
                         "--law", "exp(1)", "--trials", "20", "--seed", "3", "-o", str(p)]) == EXIT_OK
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert b"\r" not in paths[0].read_bytes()

    def test_jobs_keep_trial_order(self, capsys):
        argv = ["sample", "--ensemble", "gauss", "--beta", "1", "--n", "3", "--law", "exp(1)",
                "--trials", "12", "--seed", "5"]
        _, serial, _ = run(argv, capsys)
        _, parallel, _ = run(argv + ["--jobs", "2"], capsys)
        assert serial == parallel

    def test_hard_regime_records_zero(self, capsys):
        _, out, _ = run(["sample", "--ensemble", "laguerre", "--beta", "2", "--n", "6", "--m", "3",
                         "--l", "1", "--format", "json"], capsys)
        trial = json.loads(out)["trials"][0]
        assert trial["zero_count"] == 1
        assert len(trial["z"]) == 3

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# defaults\nensemble = gauss\nbeta = 2\nn = 5\nl = 2.0\ntrials = 3\n")
        _, out, _ = run(["sample", "--config", str(cfg), "--n", "4"], capsys)
        data = rows(out)
        assert len(data) == 3 * 4
        assert {r["l"] for r in data} == {"2.0"}

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        code, _, err = run(["sample", "--config", str(cfg)], capsys)
        assert code == EXIT_USAGE
        assert "run.cfg:1" in err

    def test_invalid_spec_is_usage_error(self, capsys):
        code, _, _ = run(["sample", "--ensemble", "gauss", "--beta", "-1", "--n", "3"], capsys)
        assert code == EXIT_USAGE

    def test_unwritable_path(self, tmp_path, capsys):
        code, _, _ = run(["sample"] + GAUSS30 + ["-o", str(tmp_path / "missing" / "x.csv")], capsys)
        assert code == EXIT_DATA


class TestDensity:
    def test_single_eigenvalue_value(self, tmp_path, capsys):
        src = tmp_path / "one.csv"
        src.write_text("trial,l,k,re,im\n0,0.5,0,0.8,0.4\n")
        code, out, _ = run(["density", "--ensemble", "gauss", "--beta", "3", "--n", "1", "--law", "exp(1)",
                            "-i", str(src)], capsys)
        assert code == EXIT_OK
        row = rows(out)[0]
        expected = -0.32 - math.log(0.8) - 0.5 - 0.5 * math.log(2 * math.pi)
        assert float(row["log_density"]) == pytest.approx(expected, abs=1e-12)
        assert row["normalized"] == "true"

    @pytest.mark.parametrize("spec", [
        ["--ensemble", "gauss", "--beta", "2", "--n", "5"],
        ["--ensemble", "laguerre", "--beta", "1", "--n", "3", "--m", "5"],
        ["--ensemble", "laguerre", "--beta", "2", "--n", "5", "--m", "2"],
        ["--ensemble", "chiral", "--beta", "2", "--n", "3", "--m", "4"],
    ], ids=["gauss", "laguerre", "hard", "chiral"])
    def test_pipe_roundtrip(self, spec, tmp_path, capsys):
        src = tmp_path / "s.json"
        assert main(["sample"] + spec + ["--law", "exp(1)", "--trials", "25", "--seed", "2",
                                         "--format", "json", "-o", str(src)]) == EXIT_OK
        code, out, _ = run(["density", "-i", str(src)], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert len(doc["trials"]) == 25
        assert all(math.isfinite(t["log_density"]) for t in doc["trials"])

    def test_csv_pipe_needs_no_meta(self, tmp_path, capsys):
        spec = ["--ensemble", "gauss", "--beta", "1", "--n", "3"]
        src = tmp_path / "s.csv"
        main(["sample"] + spec + ["--l", "0.7", "--trials", "5", "-o", str(src)])
        code, out, _ = run(["density"] + spec + ["-i", str(src)], capsys)
        assert code == EXIT_OK
        assert out.splitlines()[0] == "trial,l,k,re,im,log_density,normalized"
        assert {r["normalized"] for r in rows(out)} == {"false"}

    def test_violating_row_is_marked(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text("trial,l,k,re,im\n0,1.0,0,1.0,1.0\n1,1.0,0,1.0,0.2\n")
        code, out, _ = run(["density", "--ensemble", "gauss", "--beta", "2", "--n", "1", "-i", str(src)], capsys)
        assert code == EXIT_DATA
        data = rows(out)
        assert data[0]["log_density"] != "ERROR"
        assert data[1]["log_density"] == "ERROR"

    def test_malformed_row_names_line(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text("trial,l,k,re,im\n0,1.0,0,1.0,1.0\n0,1.0,1,oops,1.0\n")
        code, _, err = run(["density", "--ensemble", "gauss", "--beta", "2", "--n", "2", "-i", str(src)], capsys)
        assert code == EXIT_DATA
        assert "line 3" in err

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as info:
            read_configurations("trial,l,k,re,im\n0,1,0,1\n")
        assert info.value.line == 2

    def test_batch_of_1000_rows(self, tmp_path, capsys):
        src = tmp_path / "big.csv"
        main(["sample", "--ensemble", "gauss", "--beta", "2", "--n", "10", "--law", "exp(1)",
              "--trials", "100", "--seed", "1", "-o", str(src)])
        code, out, _ = run(["density", "--ensemble", "gauss", "--beta", "2", "--n", "10", "--law", "exp(1)",
                            "-i", str(src)], capsys)
        assert code == EXIT_OK
        data = rows(out)
        assert len(data) == 1000
        assert "ERROR" not in {r["log_density"] for r in data}


class TestVerify:
    def test_pass(self, tmp_path, capsys):
        report = tmp_path / "r.json"
        code, _, err = run(["verify", "--suite", "charpoly", "--trials", "20", "-o", str(report)], capsys)
        assert code == EXIT_OK
        doc = json.loads(report.read_text())
        assert doc["pass"] is True
        assert set(doc) >= {"suite", "seed", "trials", "pass", "checks"}
        for check in doc["checks"]:
            assert set(check) >= {"name", "pass", "worst_error", "count"}
        assert "PASS charpoly" in err

    def test_fault_hook(self, monkeypatch, capsys):
        monkeypatch.setenv(FAULT_ENV, "1")
        code, out, err = run(["verify", "--suite", "charpoly", "--trials", "5"], capsys)
        assert code == EXIT_VERIFY
        assert "[FAIL] charpoly/charpoly_identity" in err
        assert json.loads(out)["pass"] is False

    def test_unknown_suite(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--suite", "nonsense"])
        assert info.value.code == EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_missing_suite(self, capsys):
        code, _, err = run(["verify", "--trials", "3"], capsys)
        assert code == EXIT_USAGE
        assert "usage:" in err


class TestPlot:
    def _svg(self, tmp_path, sample_args, name):
        src = tmp_path / f"{name}.json"
        assert main(["sample"] + sample_args + ["--format", "json", "-o", str(src)]) == EXIT_OK
        out = tmp_path / f"{name}.svg"
        assert main(["plot", "-i", str(src), "-o", str(out)]) == EXIT_OK
        return src, out.read_text()

    def test_gauss30_scatter(self, tmp_path):
        src, svg = self._svg(tmp_path, GAUSS30, "gauss30")
        assert svg.lstrip().startswith("<?xml")
        assert "<image" not in svg
        assert "ensemble=gauss, beta=2, n=30, l=1" in svg
        z = np.array([complex(*p) for p in json.loads(src.read_text())["trials"][0]["z"]])
        assert np.all(z.real * z.imag > 0)

    def test_laguerre_upper_half_plane(self, tmp_path):
        src, svg = self._svg(tmp_path, ["--ensemble", "laguerre", "--beta", "2", "--n", "6", "--m", "8",
                                        "--l", "1", "--trials", "5"], "lag")
        assert "m=8" in svg
        for trial in json.loads(src.read_text())["trials"]:
            assert all(im > 0 for _, im in trial["z"])

    def test_empty_input(self, tmp_path, capsys):
        src = tmp_path / "empty.csv"
        src.write_text("trial,l,k,re,im\n")
        out = tmp_path / "empty.svg"
        assert main(["plot", "-i", str(src), "-o", str(out)]) == EXIT_OK
        svg = out.read_text()
        assert "</svg>" in svg
        assert "<image" not in svg

    def test_svg_is_deterministic(self, tmp_path):
        _, a = self._svg(tmp_path, GAUSS30, "a")
        _, b = self._svg(tmp_path, GAUSS30, "b")
        assert a == b

    def test_needs_output(self, tmp_path, capsys):
        src = tmp_path / "empty.csv"
        src.write_text("trial,l,k,re,im\n")
        code, _, _ = run(["plot", "-i", str(src)], capsys)
        assert code == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "betaperturb", "sample", "--n", "2", "--l", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert re.match(r"trial,l,k,re,im\n0,1\.0,0,", proc.stdout)
