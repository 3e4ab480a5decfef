"""Command-line front end: scenario validation, execution, determinism."""

import json
from pathlib import Path

import numpy as np
import pytest

from levimag.cli import main
from levimag.io import read_table, write_table
from levimag.scenarios import (
    ScenarioError,
    bundled_scenarios,
    load_scenario,
    validate_scenario,
)

BUNDLED = [
    "cooling_limit",
    "fig3_aspect_ratio",
    "fig4b_coupling_map",
    "fig6a_ringdown",
    "fig6b_freq_vs_field",
    "fig6c_brownian_psd",
    "fig6d_q_vs_freq",
    "fig7_fock_prep",
    "fig9_readout_lag",
]


class TestCatalog:
    def test_nine_bundled_scenarios(self):
        assert sorted(bundled_scenarios()) == BUNDLED

    def test_each_entry_names_its_figure(self):
        for name, scenario in bundled_scenarios().items():
            assert scenario["description"]
            if name.startswith("fig"):
                assert name.split("_")[0] in scenario["description"]

    def test_catalog_deterministic(self):
        assert list(bundled_scenarios()) == list(bundled_scenarios())

    def test_all_bundled_validate(self):
        for scenario in bundled_scenarios().values():
            validate_scenario(scenario)

    def test_list_command(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 9


class TestValidation:
    def test_empty_file_rejected(self, tmp_path, capsys):
        bad = tmp_path / "empty.json"
        bad.write_text("")
        assert main(["validate", str(bad)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_run_empty_file_nonzero(self, tmp_path):
        bad = tmp_path / "empty.json"
        bad.write_text("")
        assert main(["run", str(bad), "--out", str(tmp_path)]) == 1

    def test_missing_key_named(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "schema_version": 1, "name": "x", "kind": "design", "seed": 1,
            "params": {"target": "aspect_ratio", "material": "iron",
                       "field_t": 0.1},
        }))
        with pytest.raises(ScenarioError, match="params.minor_axis_m"):
            load_scenario(bad)

    def test_wrong_type_named(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "schema_version": 1, "name": "x", "kind": "design", "seed": "one",
            "params": {},
        }))
        with pytest.raises(ScenarioError, match="scenario.seed"):
            load_scenario(bad)

    def test_unknown_kind(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "schema_version": 1, "name": "x", "kind": "teleport", "seed": 1,
            "params": {},
        }))
        with pytest.raises(ScenarioError, match="scenario.kind"):
            load_scenario(bad)

    def test_wrong_schema_version(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "schema_version": 99, "name": "x", "kind": "design", "seed": 1,
            "params": {},
        }))
        with pytest.raises(ScenarioError, match="schema_version"):
            load_scenario(bad)

    def test_validate_command_ok(self, tmp_path, capsys):
        good = tmp_path / "ok.json"
        good.write_text(json.dumps({
            "schema_version": 1, "name": "mini", "kind": "design", "seed": 1,
            "params": {"target": "aspect_ratio", "material": "iron",
                       "minor_axis_m": 1e-8, "field_t": 0.1, "n_points": 5},
        }))
        assert main(["validate", str(good)]) == 0


class TestRun:
    def test_fig3_peak_at_design_ratio(self, tmp_path):
        assert main(["run", "fig3_aspect_ratio", "--out", str(tmp_path)]) == 0
        _, cols = read_table(tmp_path / "fig3_aspect_ratio.sweep.csv")
        peak_r = cols["aspect_ratio"][np.argmax(cols["frequency_hz"])]
        assert peak_r == pytest.approx(2.606, abs=0.05)
        manifest = json.loads(
            (tmp_path / "fig3_aspect_ratio.manifest.json").read_text())
        assert manifest["results"]["r_star"] == pytest.approx(2.606, abs=0.01)

    def test_fig4b_map_outputs(self, tmp_path):
        assert main(["run", "fig4b_coupling_map", "--out", str(tmp_path)]) == 0
        header, cols = read_table(tmp_path / "fig4b_coupling_map.grid.csv")
        assert header["threshold_hz"] == pytest.approx(2000.0)
        # strong-coupling region non-empty within 200 nm
        mask = (cols["radius_m"] <= 2e-7) & (cols["gap_m"] <= 2e-7)
        assert (cols["coupling_hz"][mask] > 2000.0).any()
        contour = read_table(tmp_path / "fig4b_coupling_map.contour.csv")[1]
        assert len(contour["radius_m"]) > 0

    def test_byte_identical_reruns(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        for out in (out1, out2):
            assert main(["run", "fig6a_ringdown", "--out", str(out)]) == 0
        for name in ("fig6a_ringdown.trajectory.csv",
                     "fig6a_ringdown.readout.csv",
                     "fig6a_ringdown.fit.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        m1 = json.loads((out1 / "fig6a_ringdown.manifest.json").read_text())
        m2 = json.loads((out2 / "fig6a_ringdown.manifest.json").read_text())
        m1.pop("wall_time_s"), m2.pop("wall_time_s")
        assert m1 == m2

    def test_seed_override_changes_data(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["run", "fig6a_ringdown", "--out", str(out1)]) == 0
        assert main(["run", "fig6a_ringdown", "--out", str(out2),
                     "--seed", "99"]) == 0
        a = (out1 / "fig6a_ringdown.trajectory.csv").read_bytes()
        b = (out2 / "fig6a_ringdown.trajectory.csv").read_bytes()
        assert a != b

    def test_numerical_failure_exit_code(self, tmp_path):
        # a featureless record has no resolvable spectral peak
        rng = np.random.default_rng(0)
        csv = tmp_path / "noise.csv"
        write_table(csv, {"t_s": np.arange(4096) * 1e-5,
                          "signal": rng.normal(0, 1, 4096)},
                    params={"dt_s": 1e-5})
        scenario = tmp_path / "analyze.json"
        scenario.write_text(json.dumps({
            "schema_version": 1, "name": "noisefit", "kind": "analyze",
            "seed": 1,
            "params": {"input_csv": str(csv), "column": "signal",
                       "method": "psd_lorentzian", "n_segments": 4},
        }))
        assert main(["run", str(scenario), "--out", str(tmp_path)]) == 2

    def test_unknown_scenario_name(self, tmp_path, capsys):
        assert main(["run", "no_such_thing", "--out", str(tmp_path)]) == 1
        assert "bundled" in capsys.readouterr().err

    def test_out_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LEVIMAG_OUT", str(tmp_path))
        assert main(["run", "fig6d_q_vs_freq"]) == 0
        assert (tmp_path / "fig6d_q_vs_freq.q_vs_frequency.csv").exists()

    def test_fig6d_q_linear_in_frequency(self, tmp_path):
        assert main(["run", "fig6d_q_vs_freq", "--out", str(tmp_path)]) == 0
        _, cols = read_table(tmp_path / "fig6d_q_vs_freq.q_vs_frequency.csv")
        ratio = cols["q"] / cols["frequency_hz"]
        assert np.allclose(ratio, ratio[0], rtol=1e-9)

    def test_analyze_roundtrip_on_simulated_csv(self, tmp_path):
        # simulate-classical writes a trajectory the analyze kind can read
        assert main(["run", "fig6a_ringdown", "--out", str(tmp_path)]) == 0
        scenario = tmp_path / "refit.json"
        scenario.write_text(json.dumps({
            "schema_version": 1, "name": "refit", "kind": "analyze", "seed": 1,
            "params": {
                "input_csv": str(tmp_path / "fig6a_ringdown.trajectory.csv"),
                "column": "phi_rad", "method": "ringdown"},
        }))
        assert main(["run", str(scenario), "--out", str(tmp_path)]) == 0
        fit = json.loads((tmp_path / "refit.fit.json").read_text())
        manifest = json.loads(
            (tmp_path / "fig6a_ringdown.manifest.json").read_text())
        # refit on the full record (no pulse skip) still lands on the line
        assert fit["frequency_hz"] == pytest.approx(
            manifest["results"]["fit_frequency_hz"], rel=0.01)


class TestIo:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "t.csv"
        write_table(path, {"a": [1.0, 2.5], "b": [3.0, -4.0]},
                    params={"dt_s": 0.1})
        params, cols = read_table(path)
        assert params == {"dt_s": 0.1}
        assert np.allclose(cols["a"], [1.0, 2.5])
        assert np.allclose(cols["b"], [3.0, -4.0])

    def test_header_optional(self, tmp_path):
        path = tmp_path / "t.csv"
        write_table(path, {"x": [1.0]})
        params, cols = read_table(path)
        assert params == {}
        assert cols["x"][0] == 1.0

    def test_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_table(tmp_path / "t.csv", {"a": [1.0], "b": [1.0, 2.0]})
