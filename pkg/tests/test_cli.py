"""Tests for the CLI commands."""

import csv
import json
import math
from pathlib import Path

import pytest
from typer.testing import CliRunner

from xychain import __version__
from xychain.cli import app, parse_bracket, parse_range, parse_temperature
from xychain.errors import ParameterError

runner = CliRunner()


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Metadata lines and data rows of a CSV written by the CLI."""
    lines = path.read_text(encoding="utf-8").splitlines()
    meta = [line for line in lines if line.startswith("#")]
    body = [line for line in lines if not line.startswith("#")]
    return meta, list(csv.DictReader(body))


class TestArgumentParsing:
    def test_exponential_shorthand(self):
        assert parse_temperature("e-5.5") == pytest.approx(math.exp(-5.5))
        assert parse_temperature("0.25") == 0.25

    @pytest.mark.parametrize("text", ["abc", "-1", "inf", "e"])
    def test_bad_temperature(self, text):
        with pytest.raises(ParameterError):
            parse_temperature(text)

    def test_range(self):
        assert parse_range("0:2:5") == [0.0, 0.5, 1.0, 1.5, 2.0]

    @pytest.mark.parametrize("text", ["0:2", "2:0:5", "0:1:1", "a:b:c"])
    def test_bad_range(self, text):
        with pytest.raises(ParameterError):
            parse_range(text)

    def test_bracket(self):
        assert parse_bracket("0.5:1.5") == (0.5, 1.5)
        with pytest.raises(ParameterError):
            parse_bracket("1.5:0.5")


class TestEvalCommand:
    """Tests for 'xychain eval'."""

    def test_ising_zero_field_json(self, tmp_path):
        out = tmp_path / "point.json"
        result = runner.invoke(
            app,
            ["eval", "--gamma", "1", "--lambda", "0", "--temp", "0",
             "--format", "json", "--out", str(out), "--quiet"],
        )
        assert result.exit_code == 0
        record = json.loads(out.read_text())
        assert record["M_z"] == pytest.approx(0.0, abs=1e-12)
        assert record["chi_z"] == pytest.approx(0.5, rel=1e-10)
        assert record["F"] == pytest.approx(-1.0, rel=1e-12)
        assert record["beta_g"] == pytest.approx(math.pi, rel=1e-12)

    def test_xx_magnetization_csv(self, tmp_path):
        out = tmp_path / "point.csv"
        result = runner.invoke(
            app, ["eval", "--gamma", "0", "--lambda", "0.5", "--out", str(out), "--quiet"]
        )
        assert result.exit_code == 0
        meta, rows = read_csv(out)
        assert meta[0] == f"# xychain {__version__}"
        assert float(rows[0]["M_z"]) == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_thermal_phase_column(self, tmp_path):
        out = tmp_path / "point.json"
        runner.invoke(
            app,
            ["eval", "-g", "1", "-l", "0.5", "-t", "0.3", "-f", "json", "-o", str(out), "-q"],
        )
        record = json.loads(out.read_text())
        assert "beta_T" in record
        assert record["beta_T"] == pytest.approx(math.pi * (1.0 + record["M_z"]))

    def test_finite_n(self, tmp_path):
        out = tmp_path / "point.json"
        result = runner.invoke(
            app,
            ["eval", "-g", "1", "-l", "0.5", "-t", "0.3", "-n", "64",
             "-f", "json", "-o", str(out), "-q"],
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["N"] == 64

    def test_fd_check_column(self, tmp_path):
        out = tmp_path / "point.json"
        result = runner.invoke(
            app,
            ["eval", "-g", "1", "-l", "0.5", "-t", "0.3", "--fd-check",
             "-f", "json", "-o", str(out), "-q"],
        )
        assert result.exit_code == 0
        record = json.loads(out.read_text())
        assert record["chi_z_fd"] == pytest.approx(record["chi_z"], rel=1e-6)

    def test_fd_check_uses_configured_step(self, tmp_path):
        config = tmp_path / "xychain.yaml"
        config.write_text("analysis:\n  fd_step: -1.0\n")
        result = runner.invoke(
            app, ["eval", "-c", str(config), "-g", "1", "-l", "0.5", "-t", "0.3", "--fd-check"]
        )
        assert result.exit_code == 2

    def test_fd_check_needs_thermodynamic_limit(self):
        result = runner.invoke(
            app, ["eval", "-g", "1", "-l", "0.5", "-t", "0.3", "-n", "64", "--fd-check"]
        )
        assert result.exit_code == 2

    def test_critical_point_exit_3(self):
        result = runner.invoke(app, ["eval", "--gamma", "1", "--lambda", "1", "--temp", "0"])
        assert result.exit_code == 3

    def test_bad_parameters_exit_2(self):
        result = runner.invoke(app, ["eval", "--gamma", "2", "--lambda", "0.5"])
        assert result.exit_code == 2

    def test_quadrature_failure_exit_4(self, tmp_path):
        config = tmp_path / "xychain.yaml"
        config.write_text("quadrature:\n  rel_tol: 1.0e-15\n  abs_tol: 0.0\n  max_subdivisions: 1\n")
        result = runner.invoke(
            app, ["eval", "-c", str(config), "-g", "1", "-l", "1", "-t", "0.001", "-q"]
        )
        assert result.exit_code == 4

    def test_prints_to_stdout(self):
        result = runner.invoke(app, ["eval", "-g", "1", "-l", "0", "-f", "json", "-q"])
        assert result.exit_code == 0
        assert '"chi_z"' in result.output


class TestScanCommand:
    """Tests for 'xychain scan'."""

    ARGS = ["scan", "--gamma", "1", "--lambda-range", "0.9:1.1:3", "--temps", "0.05,0.1,0.2", "-q"]

    def test_grid_shape(self, tmp_path):
        out = tmp_path / "grid.csv"
        result = runner.invoke(app, [*self.ARGS, "--out", str(out)])
        assert result.exit_code == 0
        meta, rows = read_csv(out)
        assert len(rows) == 9
        assert list(rows[0]) == ["gamma", "lambda", "T", "F", "M_z", "chi_z", "error"]
        assert any(line.startswith("# gamma:") for line in meta)

    def test_row_major_order(self, tmp_path):
        out = tmp_path / "grid.csv"
        runner.invoke(app, [*self.ARGS, "--out", str(out)])
        _, rows = read_csv(out)
        pairs = [(float(r["lambda"]), float(r["T"])) for r in rows]
        assert pairs == sorted(pairs)

    def test_deterministic(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        runner.invoke(app, [*self.ARGS, "--out", str(first)])
        runner.invoke(app, [*self.ARGS, "--out", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_failing_point_fills_error_column(self, tmp_path):
        out = tmp_path / "grid.csv"
        result = runner.invoke(
            app,
            ["scan", "-g", "1", "--lambda-range", "0.5:1:2", "--temps", "0",
             "--out", str(out), "-q"],
        )
        assert result.exit_code == 0
        _, rows = read_csv(out)
        assert rows[0]["error"] == ""
        assert "CriticalDivergence" in rows[1]["error"]
        assert rows[1]["chi_z"] == ""
        assert float(rows[1]["F"]) == pytest.approx(-4.0 / math.pi, rel=1e-10)

    def test_negative_field_only_fails_its_rows(self, tmp_path):
        out = tmp_path / "grid.csv"
        result = runner.invoke(
            app,
            ["scan", "-g", "1", "--lambda-range=-0.5:0.5:3", "--temps", "0.1",
             "--out", str(out), "-q"],
        )
        assert result.exit_code == 0
        _, rows = read_csv(out)
        assert len(rows) == 3
        assert "ParameterError" in rows[0]["error"]
        assert rows[0]["F"] == ""
        assert rows[1]["error"] == "" and rows[2]["error"] == ""
        assert float(rows[1]["M_z"]) == pytest.approx(0.0, abs=1e-12)

    def test_full_precision(self, tmp_path):
        out = tmp_path / "grid.csv"
        runner.invoke(app, [*self.ARGS, "--out", str(out)])
        _, rows = read_csv(out)
        value = rows[0]["chi_z"]
        assert float(format(float(value), ".17g")) == float(value)


class TestPseudocritCommand:
    def test_rows_per_temperature(self, tmp_path):
        out = tmp_path / "peaks.csv"
        result = runner.invoke(
            app, ["pseudocrit", "-g", "1", "--temps", "0.02,0.06", "--out", str(out), "-q"]
        )
        assert result.exit_code == 0
        _, rows = read_csv(out)
        assert [float(r["T"]) for r in rows] == [0.02, 0.06]
        assert all(0.9 < float(r["lambda_m"]) < 1.0 for r in rows)

    def test_failed_search_is_flagged(self, tmp_path):
        out = tmp_path / "peaks.csv"
        result = runner.invoke(
            app,
            ["pseudocrit", "-g", "1", "--temps", "0.02", "--bracket", "0.2:0.6",
             "--out", str(out), "-q"],
        )
        assert result.exit_code == 0
        _, rows = read_csv(out)
        assert "NoInteriorMaximum" in rows[0]["error"]

    def test_zero_temperature_rejected(self):
        result = runner.invoke(app, ["pseudocrit", "--temps", "0,0.1"])
        assert result.exit_code == 2


class TestExponentsCommand:
    def test_ising_defaults(self, tmp_path):
        out = tmp_path / "exponents.json"
        result = runner.invoke(app, ["exponents", "--gamma", "1", "--out", str(out)])
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert 0.98 <= report["nu"] <= 1.02
        assert set(report["fit_ranges"]) == {"kappa1", "kappa2", "drift"}
        assert set(report["r_squared"]) == {"kappa1", "kappa2", "drift"}
        assert "drift_exponent" in report
        assert len(report["drift_points"]) == 7
        assert len(report["pseudocritical"]) == 7

    def test_bad_side(self):
        result = runner.invoke(app, ["exponents", "--side", "left"])
        assert result.exit_code == 2

    def test_drift_temperatures_need_four_points(self):
        result = runner.invoke(app, ["exponents", "--drift-temps", "0.02,0.05,0.1"])
        assert result.exit_code == 2


class TestCollapseCommand:
    def test_quality_in_trailer(self, tmp_path):
        out = tmp_path / "collapse.csv"
        result = runner.invoke(
            app,
            ["collapse", "--gamma", "1", "--temps", "e-3,e-4,e-5,e-5.5",
             "--out", str(out), "-q"],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[-1].startswith("# summary ")
        summary = json.loads(lines[-1][len("# summary "):])
        assert summary["collapse_quality"] < 0.02
        _, rows = read_csv(out)
        assert list(rows[0]) == ["T", "x", "F"]
        assert len(rows) == 4 * 41


class TestUtilityCommands:
    def test_init_writes_config(self, tmp_path):
        result = runner.invoke(app, ["init", "--path", str(tmp_path)])
        assert result.exit_code == 0
        assert (tmp_path / "xychain.yaml").exists()

    def test_init_keeps_existing(self, tmp_path):
        (tmp_path / "xychain.yaml").write_text("gamma: 0.5\n")
        result = runner.invoke(app, ["init", "--path", str(tmp_path)])
        assert result.exit_code == 0
        assert (tmp_path / "xychain.yaml").read_text() == "gamma: 0.5\n"

    def test_version(self):
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_config_gamma_default(self, tmp_path):
        config = tmp_path / "xychain.yaml"
        config.write_text("gamma: 0.0\n")
        out = tmp_path / "point.json"
        result = runner.invoke(
            app, ["eval", "-c", str(config), "-l", "0.5", "-f", "json", "-o", str(out), "-q"]
        )
        assert result.exit_code == 0
        record = json.loads(out.read_text())
        assert record["gamma"] == 0.0
        assert record["M_z"] == pytest.approx(1.0 / 3.0)
