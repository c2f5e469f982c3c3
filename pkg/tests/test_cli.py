"""Config parsing, table serialization and command-line entry points."""

import json
import math

import numpy as np
import pytest

from cavitydyn.cli import (
    _render_float,
    load_scenario,
    main,
    packaged_scenarios,
    parse_config,
    read_table,
    run_validation_suite,
    write_table,
)
from cavitydyn.core import ModelVariant
from cavitydyn.errors import ConfigError, ParameterError
from cavitydyn.experiments import ColumnMeta, ResultTable

MINIMAL = """
[params]
gamma = 1.0
lambda = 0.2

[initial]
x0 = 3.0
w = 0.5
"""


class TestParseConfig:
    def test_minimal_defaults(self):
        config = parse_config(MINIMAL)
        assert config.name == "scenario"
        assert config.scheme == "I"
        assert config.params.gamma == 1.0
        assert config.params.lam == 0.2
        assert config.params.kappa == 0.0
        assert config.params.variant is ModelVariant.FULL
        assert config.backends == ("semiclassical",)
        assert config.observables == ("X",)
        assert config.grid.periods == 2.0
        assert config.average_periods == 5

    def test_zero_width_rejected_with_message(self):
        text = MINIMAL.replace("w = 0.5", "w = 0")
        with pytest.raises(ParameterError, match="w must be > 0"):
            parse_config(text)

    def test_rwa_domain_enforced(self):
        text = MINIMAL + "\n[params]\n"  # duplicate section is itself an error
        with pytest.raises(ConfigError):
            parse_config(text)
        bad = MINIMAL.replace("lambda = 0.2", "lambda = 2.5") + "\n"
        bad = bad.replace("[params]", "[params]\nvariant = rwa")
        with pytest.raises(ParameterError, match="rotating-wave"):
            parse_config(bad)

    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match=r"unknown section \[detector\]"):
            parse_config(MINIMAL + "\n[detector]\nefficiency = 0.5\n")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="unknown key 'mass'"):
            parse_config(MINIMAL + "\nmass = 2.0\n")

    def test_missing_params_section(self):
        with pytest.raises(ConfigError, match=r"\[params\]"):
            parse_config("[initial]\nx0 = 1\nw = 1\n")

    def test_scheme_field_mixing_rejected(self):
        text = MINIMAL.replace("[initial]", "[scenario]\nscheme = II\n\n[initial]")
        with pytest.raises(ConfigError, match="scheme I key"):
            parse_config(text)

    def test_malformed_number(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_config(MINIMAL.replace("gamma = 1.0", "gamma = fast"))

    def test_sweep_value_list_forms(self):
        base = MINIMAL + "\n[sweep]\nfield = params.gamma\nvalues = 0.5:1.5:3\n"
        text = base + "\n[scenario]\nobservables = sigma_bar\n"
        config = parse_config(text)
        assert config.sweeps[0].values == (0.5, 1.0, 1.5)
        comma = text.replace("0.5:1.5:3", "1.0, 0.8, 1.2")
        assert parse_config(comma).sweeps[0].values == (1.0, 0.8, 1.2)

    def test_sweep_needs_scalar_observables(self):
        text = MINIMAL + "\n[sweep]\nfield = params.gamma\nvalues = 0.5:1.5:3\n"
        with pytest.raises(ParameterError, match="scalar observables only"):
            parse_config(text)

    def test_second_axis_requires_first(self):
        text = MINIMAL + "\n[sweep2]\nfield = initial.w\nvalues = 1,2\n"
        with pytest.raises(ConfigError, match=r"\[sweep2\] given without \[sweep\]"):
            parse_config(text)


class TestRenderFloat:
    def test_shortest_round_trip(self):
        assert _render_float(0.1) == "0.1"
        assert _render_float(1.0 / 3.0) == "0.3333333333333333"
        assert float(_render_float(math.pi)) == math.pi

    def test_nan_becomes_empty(self):
        assert _render_float(math.nan) == ""


def _sample_table(with_errors=False):
    metadata = {
        "package": "cavitydyn",
        "resolved_config": {"sweeps": [{"field": "params.gamma", "values": [1.0, 2.0]}]}
        if with_errors
        else {},
        "columns": [
            {"name": "a", "unit": "dimensionless", "backend": None, "may_be_undefined": False},
            {"name": "b", "unit": "dimensionless", "backend": "fock", "may_be_undefined": True},
        ],
    }
    return ResultTable(
        columns=[ColumnMeta("a"), ColumnMeta("b", backend="fock", may_be_undefined=True)],
        data=np.array([[0.1, math.nan], [1.0 / 3.0, -2.5]]),
        metadata=metadata,
        row_errors=["", "NumericError: boom"] if with_errors else None,
    )


class TestTableSerialization:
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip_bit_exact(self, fmt, tmp_path):
        table = _sample_table()
        path = tmp_path / f"out.{fmt}"
        written = write_table(table, path, fmt=fmt)
        assert [p.name for p in written] == [f"out.{fmt}", f"out.{fmt}.meta.json"]
        back = read_table(path)
        assert back.column_names() == ["a", "b"]
        assert np.array_equal(back.data, table.data, equal_nan=True)
        assert back.metadata["package"] == "cavitydyn"
        assert back.columns[1].may_be_undefined is True
        assert back.columns[1].backend == "fock"

    def test_csv_skips_error_column_for_clean_series(self, tmp_path):
        path = tmp_path / "out.csv"
        write_table(_sample_table(), path)
        header = path.read_text().splitlines()[0]
        assert header == "a,b"

    def test_csv_error_column_round_trip(self, tmp_path):
        table = _sample_table(with_errors=True)
        path = tmp_path / "out.csv"
        write_table(table, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b,error"
        assert lines[2].endswith("NumericError: boom")
        back = read_table(path)
        assert back.row_errors == ["", "NumericError: boom"]
        assert np.array_equal(back.data, table.data, equal_nan=True)

    def test_json_null_for_undefined(self, tmp_path):
        path = tmp_path / "out.json"
        write_table(_sample_table(), path, fmt="json")
        payload = json.loads(path.read_text())
        assert payload["data"][0][1] is None
        assert payload["data"][0][0] == 0.1

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown output format"):
            write_table(_sample_table(), tmp_path / "out.xml", fmt="xml")


class TestPackagedScenarios:
    def test_one_per_supported_figure(self):
        names = packaged_scenarios()
        expected = {f"fig{k:02d}" for k in range(2, 19)}
        assert set(names) == expected

    def test_load_by_name_and_override(self):
        config = load_scenario("fig04", overrides=("sweep.values=0.9:1.1:3",))
        assert config.sweeps[0].values == (0.9, 1.0, 1.1)

    def test_unknown_name_lists_catalog(self):
        with pytest.raises(ConfigError, match="packaged scenarios: fig02"):
            load_scenario("fig99")

    def test_bad_override_shape(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            load_scenario("fig04", overrides=("gamma=1.0",))

    def test_override_unknown_field(self):
        with pytest.raises(ConfigError, match="unknown config field"):
            load_scenario("fig04", overrides=("params.mass=1.0",))


class TestSpectrumCommand:
    def test_prints_known_beat_period(self, capsys):
        assert main(["spectrum", "--gamma", "1", "--lambda", "0.05"]) == 0
        out = capsys.readouterr().out
        assert "period_T = 251.327412287183" in out
        assert "delta_bar = 0.05" in out

    def test_json_output(self, capsys):
        assert main(["spectrum", "--gamma", "1", "--lambda", "0.2", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["delta_bar"] == pytest.approx(0.2, abs=1e-12)


class TestScenarioCommand:
    def test_runs_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(
            MINIMAL
            + "\n[scenario]\nbackends = semiclassical, fock\n"
            + "\n[grid]\nt_max = 2.0\nn_points = 21\n"
            + "\n[truncation]\nn_matter_max = 36\nn_photon_max = 12\n"
        )
        out = tmp_path / "series.csv"
        assert main(["scenario", str(cfg), "--out", str(out)]) == 0
        header = out.read_text().splitlines()[0]
        assert header == "t,X_semiclassical,X_fock"
        sidecar = json.loads((tmp_path / "series.csv.meta.json").read_text())
        assert sidecar["resolved_config"]["params"]["gamma"] == 1.0

    def test_list_flag(self, capsys):
        assert main(["scenario", "--list"]) == 0
        assert "fig06" in capsys.readouterr().out.split()

    def test_set_override_recorded(self, tmp_path, capsys):
        out = tmp_path / "sw.csv"
        code = main(
            [
                "scenario", "fig04",
                "--set", "sweep.values=0.9:1.1:3",
                "--out", str(out),
            ]
        )
        assert code == 0
        sidecar = json.loads((tmp_path / "sw.csv.meta.json").read_text())
        assert sidecar["resolved_config"]["sweeps"][0]["values"] == [0.9, 1.0, 1.1]

    def test_unknown_packaged_name_exits_2(self, tmp_path, capsys):
        assert main(["scenario", "fig99", "--out-dir", str(tmp_path)]) == 2
        assert "packaged scenarios" in capsys.readouterr().err

    def test_default_output_name_uses_scenario_name(self, tmp_path, capsys):
        cfg = tmp_path / "named.cfg"
        cfg.write_text(MINIMAL + "\n[scenario]\nname = demo\n[grid]\nt_max = 1.0\nn_points = 5\n")
        assert main(["scenario", str(cfg), "--out-dir", str(tmp_path)]) == 0
        assert (tmp_path / "demo.csv").is_file()


class TestSweepCommand:
    def test_field_values_flags(self, tmp_path, capsys):
        cfg = tmp_path / "base.cfg"
        cfg.write_text(MINIMAL + "\n[scenario]\nobservables = delta_bar\n")
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "sweep", str(cfg),
                "--field", "params.lambda",
                "--values", "0.1,0.2",
                "--out", str(out),
            ]
        )
        assert code == 0
        table = read_table(out)
        assert table.column_names() == ["params.lambda", "delta_bar"]
        assert np.allclose(table.column("params.lambda"), [0.1, 0.2])
        assert np.allclose(table.column("delta_bar"), [0.1, 0.2], atol=1e-12)

    def test_requires_an_axis(self, tmp_path, capsys):
        cfg = tmp_path / "base.cfg"
        cfg.write_text(MINIMAL)
        assert main(["sweep", str(cfg), "--out-dir", str(tmp_path)]) == 2
        assert "sweep" in capsys.readouterr().err


class TestExitCodes:
    def test_config_errors_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(MINIMAL + "\n[scenario]\nobservables = position\n")
        assert main(["scenario", str(cfg), "--out-dir", str(tmp_path)]) == 2

    def test_unstable_model_exits_3(self, tmp_path, capsys):
        code = main(
            [
                "evolve", "--gamma", "0.2", "--lambda", "0.5",
                "--variant", "no_diamagnetic",
                "--x0", "1", "--w", "1", "--t-max", "1",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 3
        assert "unstable" in capsys.readouterr().err.lower()

    def test_truncation_exits_4(self, tmp_path, capsys):
        code = main(
            [
                "evolve", "--gamma", "1", "--lambda", "0.2",
                "--x0", "3", "--w", "0.5", "--t-max", "1",
                "--backends", "fock",
                "--n-matter-max", "6", "--n-photon-max", "6",
                "--out-dir", str(tmp_path),
            ]
        )
        assert code == 4

    def test_machine_error_report(self, tmp_path, capsys):
        code = main(
            [
                "scenario", "fig99", "--machine", "--out-dir", str(tmp_path),
            ]
        )
        assert code == 2
        report = json.loads(capsys.readouterr().err)
        assert report["error"] == "ConfigError"
        assert report["exit_code"] == 2
        assert "fig99" in report["message"]


class TestValidateCommand:
    def test_all_invariants_pass(self, capsys):
        assert main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "0 failed" in out
        assert out.count("PASS") == len(run_validation_suite())
