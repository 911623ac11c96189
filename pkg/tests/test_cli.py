import json
import math
import subprocess
import sys

import jsonschema
import pytest

from ruelle_rand import __version__
from ruelle_rand.cli import dispatch
from ruelle_rand.report import schema_text

SCHEMA = json.loads(schema_text())
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def run_cli(capsys, *argv):
    code = dispatch(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def parse_checked(stdout: str) -> dict:
    env = json.loads(stdout)
    errors = sorted(VALIDATOR.iter_errors(env), key=str)
    assert not errors, errors[0] if errors else None
    return env


class TestUsage:
    def test_no_subcommand(self, capsys):
        code, _, err = run_cli(capsys)
        assert code == 1
        assert "usage" in err

    def test_unknown_subcommand(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 1

    def test_missing_required_flag(self, capsys):
        code, _, _ = run_cli(capsys, "spectrum")
        assert code == 1

    def test_non_integer_level(self, capsys):
        code, _, _ = run_cli(capsys, "spectrum", "--level", "abc")
        assert code == 1

    def test_version_flag(self, capsys):
        code, out, err = run_cli(capsys, "--version")
        assert code == 0
        assert __version__ in out + err

    def test_console_script_installed(self):
        out = subprocess.run(["ruelle-rand", "--version"],
                             capture_output=True, text=True)
        assert out.returncode == 0
        assert __version__ in out.stdout + out.stderr

    def test_schema_is_valid_draft(self):
        VALIDATOR.check_schema(SCHEMA)


class TestSamplePath:
    def test_report_shape(self, capsys):
        code, out, _ = run_cli(capsys, "sample-path", "--level", "6",
                               "--seed", "9")
        assert code == 0
        env = parse_checked(out)
        assert env["schema_version"] == "1"
        assert env["manifest"]["subcommand"] == "sample-path"
        assert env["manifest"]["version"] == __version__
        rep = env["report"]
        assert rep["level"] == 6 and rep["alphabet"] == 2 and rep["seed"] == 9
        assert rep["stats"]["gamma"] == 0.4
        assert rep["stats"]["min"] <= 0.0 <= rep["stats"]["max"]

    def test_zero_noise(self, capsys):
        code, out, _ = run_cli(capsys, "sample-path", "--level", "5",
                               "--zero-noise")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["b1"] == 0.0
        assert rep["stats"]["max"] == 0.0 and rep["stats"]["holder_constant"] == 0.0

    def test_csv_sidecar(self, capsys, tmp_path):
        csv = tmp_path / "path.csv"
        code, out, _ = run_cli(capsys, "sample-path", "--level", "4",
                               "--csv", str(csv))
        assert code == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "k,t,value"
        assert len(lines) == 1 + 17
        ts = [float(l.split(",")[1]) for l in lines[1:]]
        assert ts == sorted(ts) and ts[0] == 0.0 and ts[-1] == 1.0
        assert str(csv) in parse_checked(out)["manifest"]["outputs"]

    def test_out_file_duplicates_stdout(self, capsys, tmp_path):
        dest = tmp_path / "rep.json"
        code, out, _ = run_cli(capsys, "sample-path", "--level", "3",
                               "--out", str(dest))
        assert code == 0
        assert dest.read_text() == out

    def test_stable_report_across_runs(self, capsys):
        _, out1, _ = run_cli(capsys, "sample-path", "--level", "5", "--seed", "4")
        _, out2, _ = run_cli(capsys, "sample-path", "--level", "5", "--seed", "4")
        # manifests carry a timestamp; the report payload must match exactly
        assert json.loads(out1)["report"] == json.loads(out2)["report"]

    def test_bad_gamma(self, capsys):
        code, _, err = run_cli(capsys, "sample-path", "--level", "4",
                               "--gamma", "0.6")
        assert code == 1
        assert "error" in err


class TestSpectrum:
    def test_zero_noise_exact(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--level", "8", "--zero-noise")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["lambda"] == 2.0
        assert rep["residual"] == 0.0
        assert rep["converged"] is True
        assert rep["ratio_point"] == "1/2^1"
        assert rep["pathwise_bounds"]["lower_ok"] and rep["pathwise_bounds"]["upper_ok"]

    def test_seeded_identities(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--level", "10", "--seed", "3")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["ratio_identity_gap"] <= 1e-10
        assert rep["lambda"] > 1.0
        assert rep["log_lambda"] == pytest.approx(math.log(rep["lambda"]), rel=1e-14)

    def test_beta_warning_with_zero_noise(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--level", "4",
                               "--zero-noise", "--beta", "2.0")
        assert code == 0
        assert "no effect" in err

    def test_trinary_ratio_point(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--level", "4",
                               "--alphabet", "3", "--seed", "6")
        assert code == 0
        assert parse_checked(out)["report"]["ratio_point"] == "1/3^1"

    def test_eigenfunction_csv(self, capsys, tmp_path):
        csv = tmp_path / "h.csv"
        code, _, _ = run_cli(capsys, "spectrum", "--level", "3", "--seed", "2",
                             "--emit-eigenfunction", str(csv))
        assert code == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "word,t,h"
        assert len(lines) == 9
        words = [l.split(",")[0] for l in lines[1:]]
        assert words == sorted(words)
        assert words[0] == "000" and words[-1] == "111"
        assert all(float(l.split(",")[2]) > 0 for l in lines[1:])

    def test_tiny_alphabet_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "spectrum", "--level", "4",
                             "--alphabet", "1")
        assert code == 1


class TestIsometryCheck:
    def test_exactness(self, capsys):
        code, out, _ = run_cli(capsys, "isometry-check", "--level", "6",
                               "--trials", "50", "--seed", "1")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["max_norm_discrepancy"] == 0.0
        assert rep["roundtrip_failures"] == 0
        assert rep["trials"] == 50

    def test_trinary(self, capsys):
        code, out, _ = run_cli(capsys, "isometry-check", "--level", "4",
                               "--alphabet", "3", "--trials", "20")
        assert code == 0
        assert parse_checked(out)["report"]["roundtrip_failures"] == 0


class TestPressure:
    def test_small_batch(self, capsys, tmp_path):
        csv = tmp_path / "birkhoff.csv"
        code, out, _ = run_cli(capsys, "pressure", "--level", "6",
                               "--replicas", "16", "--kmax", "8",
                               "--seed", "5", "--emit-birkhoff", str(csv))
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["n"] == 16 and rep["n_failed"] == 0
        assert rep["jensen_ok"] and rep["bounds_ok"] and rep["all_positive"]
        assert rep["variational_violations"] == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "k,value"
        assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(1, 9))

    def test_flat_potential_pins_mean(self, capsys):
        code, out, _ = run_cli(capsys, "pressure", "--level", "5",
                               "--replicas", "4", "--kmax", "4", "--beta", "0")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["mean_log_lambda"] == pytest.approx(math.log(2), rel=1e-12)
        assert rep["stderr"] == 0.0


class TestMontecarlo:
    def test_batch_with_csv(self, capsys, tmp_path):
        csv = tmp_path / "rows.csv"
        code, out, _ = run_cli(capsys, "montecarlo", "--level", "6",
                               "--replicas", "24", "--seed", "8",
                               "--csv", str(csv))
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["n_converged"] == 24 and rep["n_failed"] == 0
        assert rep["bounds_ok"] is True
        assert rep["expectation_band_ok"] is True
        assert rep["tightened"]["tightened_bound_ok"] is True
        lines = csv.read_text().splitlines()
        assert lines[0] == "seed,lambda,log_lambda,M1,B1"
        assert len(lines) == 25

    def test_band_only_gated_at_unit_beta(self, capsys):
        code, out, _ = run_cli(capsys, "montecarlo", "--level", "5",
                               "--replicas", "6", "--beta", "0.5")
        assert code == 0
        assert parse_checked(out)["report"]["expectation_band_ok"] is None

    def test_worker_count_does_not_change_report(self, capsys):
        argv = ["montecarlo", "--level", "6", "--replicas", "12", "--seed", "3"]
        _, out1, _ = run_cli(capsys, *argv, "--workers", "1")
        _, out2, _ = run_cli(capsys, *argv, "--workers", "2")
        r1, r2 = json.loads(out1)["report"], json.loads(out2)["report"]
        r1.pop("wall_time"), r2.pop("wall_time")
        assert r1 == r2

    def test_bad_workers_env(self, capsys, monkeypatch):
        monkeypatch.setenv("RUELLE_RAND_WORKERS", "zero")
        code, _, err = run_cli(capsys, "montecarlo", "--level", "4",
                               "--replicas", "2")
        assert code == 1
        assert "error" in err


class TestRefineStudy:
    def test_two_level_study(self, capsys):
        code, out, _ = run_cli(capsys, "refine-study", "--levels", "5,7",
                               "--replicas", "8", "--seed", "2")
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["pairs"] == ["5->7"]
        assert rep["mean_abs_drift"][0] > 0

    def test_flat_potential_fails_strict_decrease(self, capsys):
        # beta 0 pins every drift to 0; the strict-decrease gate must trip
        code, out, _ = run_cli(capsys, "refine-study", "--levels", "4,6,8",
                               "--replicas", "4", "--beta", "0")
        assert code == 2
        assert parse_checked(out)["report"]["decreasing"] is False

    def test_malformed_levels(self, capsys):
        code, _, err = run_cli(capsys, "refine-study", "--levels", "a,b")
        assert code == 1
        assert "comma-separated" in err

    def test_single_level_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "refine-study", "--levels", "8",
                             "--replicas", "2")
        assert code == 1


class TestPlot:
    def _sample_csv(self, capsys, tmp_path):
        csv = tmp_path / "path.csv"
        run_cli(capsys, "sample-path", "--level", "5", "--seed", "3",
                "--csv", str(csv))
        return csv

    def test_path_plot_deterministic(self, capsys, tmp_path):
        csv = self._sample_csv(capsys, tmp_path)
        svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
        code, out, _ = run_cli(capsys, "plot", "--kind", "path",
                               "--input", str(csv), "--out", str(svg1))
        assert code == 0
        rep = parse_checked(out)["report"]
        assert rep["points"] == 33
        run_cli(capsys, "plot", "--kind", "path", "--input", str(csv),
                "--out", str(svg2))
        b1, b2 = svg1.read_bytes(), svg2.read_bytes()
        assert b1 == b2
        assert b1.startswith(b"<svg") and b1.rstrip().endswith(b"</svg>")

    def test_histogram_plot(self, capsys, tmp_path):
        csv = tmp_path / "rows.csv"
        run_cli(capsys, "montecarlo", "--level", "5", "--replicas", "12",
                "--csv", str(csv))
        svg = tmp_path / "hist.svg"
        code, out, _ = run_cli(capsys, "plot", "--kind", "histogram",
                               "--input", str(csv), "--out", str(svg))
        assert code == 0
        assert parse_checked(out)["report"]["points"] == 12
        assert svg.read_bytes().startswith(b"<svg")

    def test_birkhoff_plot(self, capsys, tmp_path):
        csv = tmp_path / "birkhoff.csv"
        run_cli(capsys, "pressure", "--level", "5", "--replicas", "4",
                "--kmax", "16", "--emit-birkhoff", str(csv))
        svg = tmp_path / "b.svg"
        code, out, _ = run_cli(capsys, "plot", "--kind", "birkhoff",
                               "--input", str(csv), "--out", str(svg))
        assert code == 0
        assert parse_checked(out)["report"]["points"] == 16

    def test_wrong_columns(self, capsys, tmp_path):
        csv = self._sample_csv(capsys, tmp_path)
        code, _, err = run_cli(capsys, "plot", "--kind", "histogram",
                               "--input", str(csv), "--out",
                               str(tmp_path / "x.svg"))
        assert code == 1
        assert "malformed" in err

    def test_missing_input(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "plot", "--kind", "path",
                             "--input", str(tmp_path / "nope.csv"),
                             "--out", str(tmp_path / "x.svg"))
        assert code == 1

    def test_header_only_csv(self, capsys, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("t,value\n")
        code, _, err = run_cli(capsys, "plot", "--kind", "path",
                               "--input", str(csv), "--out",
                               str(tmp_path / "x.svg"))
        assert code == 1
        assert "no data rows" in err
