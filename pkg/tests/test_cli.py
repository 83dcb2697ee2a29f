import json
from pathlib import Path

import numpy as np
import pytest

from settomo.cli import main, validate_config

KERNEL_32 = {
    "gaussian": {
        "sigma_plus": 1.0,
        "sigma_minus": 3.0,
        "chirp": 0.5,
        "grid": {"center": 0.0, "span": 16.0, "n": 32},
    }
}


def write_config(tmp_path: Path, body: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(body, indent=1))
    return path


def base_config(scenario: str, **extra) -> dict:
    cfg = {"schema_version": 1, "scenario": scenario}
    cfg.update(extra)
    return cfg


def read_outputs(out_dir: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


class TestValidate:
    def test_minimal_ok(self, tmp_path, capsys):
        cfg = write_config(tmp_path, base_config("jsa", kernel=KERNEL_32))
        assert main(["validate", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("ok")
        effective = json.loads(out[out.index("{"):])
        assert effective["tol"] == 1e-12  # defaults listed

    def test_unknown_key_named(self, tmp_path, capsys):
        cfg = write_config(tmp_path, base_config("jsa", kernel=KERNEL_32, bogus=1))
        assert main(["validate", "--config", str(cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_negative_gain_cites_invariant(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            base_config(
                "direct", kernel=KERNEL_32, seed_beam={"flat": {}}, gain=-0.5
            ),
        )
        assert main(["validate", "--config", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "gain" in err and ">= 0" in err

    def test_all_errors_reported_at_once(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"schema_version": 7, "scenario": "unknown", "mystery": 1},
        )
        assert main(["validate", "--config", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "schema_version" in err
        assert "scenario" in err
        assert "mystery" in err

    def test_validate_config_collects(self):
        effective, errors = validate_config(
            {"schema_version": 1, "scenario": "gain-sweep"}
        )
        assert any("gains" in e for e in errors)
        assert any("settings" in e for e in errors)


class TestScenarios:
    def test_direct_csv_columns(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config(
                "direct",
                kernel=KERNEL_32,
                seed_beam={"flat": {"amplitude": 1.0}},
                gain=0.01,
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["direct", "--config", str(cfg)]) == 0
        lines = (tmp_path / "out" / "direct.csv").read_text().splitlines()
        assert lines[0].startswith("# settomo")
        assert lines[1] == "k_s,intensity_exact,intensity_lowgain,intensity_sipe"
        assert len(lines) == 2 + 32
        cells = lines[2].split(",")
        assert len(cells) == 4
        assert float(cells[0]) == pytest.approx(-7.75)
        assert all("(" not in c for c in cells)

    def test_interf_outputs(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config(
                "interf",
                kernel=KERNEL_32,
                seed_beam={"flat": {}},
                gain=0.01,
                grid_sigma={"center": 0.0, "span": 6.0, "n": 6},
                grid_eta={"center": 0.0, "span": 6.0, "n": 5},
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["interf", "--config", str(cfg)]) == 0
        lines = (tmp_path / "out" / "interf.csv").read_text().splitlines()
        assert lines[1] == "q_sigma,q_eta,re_S,im_S"
        assert len(lines) == 2 + 30
        record = json.loads((tmp_path / "out" / "record.json").read_text())
        assert record["provenance"] == "lowgain"

    def test_reconstruct_fixture_fidelity(self, tmp_path):
        n = 32
        span = 16.0
        dq = 2 * np.pi / span
        cfg = write_config(
            tmp_path,
            base_config(
                "reconstruct",
                kernel=KERNEL_32,
                seed_beam={"flat": {}},
                gain=0.001,
                grid_sigma={"center": 0.0, "span": dq * n, "n": n},
                grid_eta={"center": 0.0, "span": dq * n, "n": n},
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["reconstruct", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["fidelity"] >= 0.99
        assert summary["masked_fraction"] == 0.0
        assert "config_sha256" in summary
        assert (tmp_path / "out" / "recovered_kernel.json").exists()

    def test_reconstruct_from_record_file(self, tmp_path):
        # generate a record, then reconstruct from the file as external data
        gen = write_config(
            tmp_path,
            base_config(
                "interf",
                kernel=KERNEL_32,
                seed_beam={"flat": {}},
                gain=0.001,
                grid_sigma={"center": 0.0, "span": 2 * np.pi / 16 * 32, "n": 32},
                grid_eta={"center": 0.0, "span": 2 * np.pi / 16 * 32, "n": 32},
                out_dir=str(tmp_path / "gen"),
            ),
            name="gen.json",
        )
        assert main(["interf", "--config", str(gen)]) == 0
        cfg = write_config(
            tmp_path,
            base_config(
                "reconstruct",
                record={"file": "gen/record.json"},
                seed_beam={"flat": {}},
                gain=0.001,
                target_grid=KERNEL_32["gaussian"]["grid"],
                truth_kernel=KERNEL_32,
                out_dir=str(tmp_path / "out2"),
            ),
        )
        assert main(["reconstruct", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out2" / "summary.json").read_text())
        assert summary["fidelity"] >= 0.99

    def test_gain_sweep_slope(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config(
                "gain-sweep",
                kernel=KERNEL_32,
                seed_beam={"flat": {}},
                gains={"log10_min": -3, "log10_max": -1, "n": 9},
                settings={"q_sigma": 0.4, "q_eta": 0.6, "theta": 0.3},
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["gain-sweep", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["gamma3_slope"] == pytest.approx(3.0, abs=0.2)

    def test_noise_sweep(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config(
                "noise-sweep",
                kernel=KERNEL_32,
                seed_beam={"flat": {}},
                gain=0.01,
                seed=123,
                grid_sigma={"center": 0.0, "span": 4.0, "n": 4},
                grid_eta={"center": 0.0, "span": 4.0, "n": 4},
                noise_sweep=[
                    {"delta_eta": 0.05, "delta_sigma": 0.1, "mc_samples": 500},
                ],
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["noise-sweep", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["min_frac_within_3se"] >= 0.9

    def test_oracle_check(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config("oracle-check", trials=20, out_dir=str(tmp_path / "out")),
        )
        assert main(["oracle-check", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["max_rel_dev"] <= 1e-8

    def test_schmidt_scenario(self, tmp_path):
        cfg = write_config(
            tmp_path,
            base_config("schmidt", kernel=KERNEL_32, out_dir=str(tmp_path / "out")),
        )
        assert main(["schmidt", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["sum_lambdas"] == pytest.approx(1.0, abs=1e-10)

    def test_jsa_scenario_writes_kernel(self, tmp_path):
        cfg = write_config(
            tmp_path, base_config("jsa", kernel=KERNEL_32, out_dir=str(tmp_path / "out"))
        )
        assert main(["jsa", "--config", str(cfg)]) == 0
        kernel = json.loads((tmp_path / "out" / "kernel.json").read_text())
        assert "kernel" in kernel and "meta" in kernel
        # every output file carries version and config hash
        assert kernel["run"]["toolkit_version"]
        assert len(kernel["run"]["config_sha256"]) == 64

    def test_jsa_from_pump_phasematch(self, tmp_path):
        from settomo.grids import Field2D, field2d_to_json, make_grid

        grid = make_grid(0.0, 12.0, 16)
        k = grid.points
        pm_vals = np.exp(-((k[:, None] - k[None, :]) ** 2) / 8.0)
        (tmp_path / "pm.json").write_text(
            field2d_to_json(Field2D(grid_s=grid, grid_i=grid, values=pm_vals))
        )
        pump_grid = {"center": 0.0, "span": 60.0, "n": 601}
        u = np.linspace(-30 + 0.05, 30 - 0.05, 601)
        cfg = write_config(
            tmp_path,
            base_config(
                "jsa",
                kernel={
                    "pump_phasematch": {
                        "pump_grid": pump_grid,
                        "pump_re": np.exp(-(u**2) / 4.0).tolist(),
                        "pump_im": np.zeros_like(u).tolist(),
                        "chirp": 0.3,
                        "pm_file": "pm.json",
                    }
                },
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["jsa", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["norm_factor"] > 0
        assert summary["schmidt_number"] > 1.0


class TestRobustness:
    def test_missing_input_no_partial_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path,
            base_config(
                "schmidt", kernel={"file": "nope.json"}, out_dir=str(out)
            ),
        )
        assert main(["schmidt", "--config", str(cfg)]) == 2
        assert "not found" in capsys.readouterr().err
        assert not out.exists()

    def test_scenario_command_mismatch(self, tmp_path, capsys):
        cfg = write_config(tmp_path, base_config("jsa", kernel=KERNEL_32))
        assert main(["schmidt", "--config", str(cfg)]) == 2

    def test_unparseable_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["validate", "--config", str(path)]) == 2

    def test_numeric_error_exit_code(self, tmp_path, capsys):
        # reg_eps > 1 masks every cell: reconstruction fails numerically
        n = 16
        cfg = write_config(
            tmp_path,
            base_config(
                "reconstruct",
                kernel={
                    "gaussian": {
                        "sigma_plus": 1.0,
                        "sigma_minus": 2.0,
                        "chirp": 0.0,
                        "grid": {"center": 0.0, "span": 12.0, "n": n},
                    }
                },
                seed_beam={"flat": {}},
                gain=0.001,
                reg_eps=2.0,
                grid_sigma={"center": 0.0, "span": 8.0, "n": n},
                grid_eta={"center": 0.0, "span": 8.0, "n": n},
                out_dir=str(tmp_path / "out"),
            ),
        )
        assert main(["reconstruct", "--config", str(cfg)]) == 3
        assert "ReconstructionError" in capsys.readouterr().err

    def test_byte_reproducibility(self, tmp_path):
        body = base_config(
            "noise-sweep",
            kernel=KERNEL_32,
            seed_beam={"flat": {}},
            gain=0.01,
            seed=7,
            grid_sigma={"center": 0.0, "span": 4.0, "n": 3},
            grid_eta={"center": 0.0, "span": 4.0, "n": 3},
            noise_sweep=[{"delta_eta": 0.05, "delta_sigma": 0.05, "mc_samples": 200}],
        )
        cfg = write_config(tmp_path, body)
        assert main(["noise-sweep", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
        assert main(["noise-sweep", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
        a = read_outputs(tmp_path / "a")
        b = read_outputs(tmp_path / "b")
        assert a == b

    def test_seed_override(self, tmp_path):
        body = base_config(
            "oracle-check", trials=3, out_dir=str(tmp_path / "out")
        )
        cfg = write_config(tmp_path, body)
        assert main(["oracle-check", "--config", str(cfg), "--seed", "99"]) == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["seed"] == 99
