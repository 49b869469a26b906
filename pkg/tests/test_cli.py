import json
import subprocess
import sys

import numpy as np
import pytest

from tweezersim import cli
from tweezersim.params import PARAM_DOCS
from tweezersim.sweep import load_manifest

FAST_CONFIG = {
    "n_atoms": 1,
    "eta_g": 0.1,
    "eta_r": 0.1,
    "omega_trap_g": 10.0,
    "omega_trap_r": 10.0,
    "t_final_over_t": 3.0,
    "steady_window": [1.0, 3.0],
    "dt_over_t": 0.002,
}


@pytest.fixture
def fast_config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(FAST_CONFIG))
    return path


def run_dir_of(root):
    dirs = list((root).glob("*/manifest.json"))
    assert len(dirs) == 1
    return dirs[0].parent


class TestRunCommand:
    def test_missing_config_exits_1(self, tmp_path, capsys):
        rc = cli.main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert rc == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n_atoms": 0}))
        assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1

    def test_run_writes_directory_and_prints_label(self, fast_config_path, tmp_path, capsys):
        out_root = tmp_path / "out"
        rc = cli.main(["run", "--config", str(fast_config_path), "--out", str(out_root)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "phase:" in printed
        run_dir = run_dir_of(out_root)
        for name in ("timeseries.csv", "spectrum_internal.csv", "spectrum_motional.csv",
                     "phasespace.csv", "manifest.json"):
            assert (run_dir / name).exists()

    def test_flag_overrides_file(self, fast_config_path, tmp_path):
        out_root = tmp_path / "out"
        rc = cli.main(
            ["run", "--config", str(fast_config_path), "--out", str(out_root),
             "--omega-trap-r", "14.0", "--eta-r", "0.08"]
        )
        assert rc == 0
        manifest = load_manifest(run_dir_of(out_root))
        assert manifest["config"]["omega_trap_r"] == 14.0
        assert manifest["config"]["eta_r"] == 0.08

    def test_idempotent_outputs(self, fast_config_path, tmp_path):
        a_root, b_root = tmp_path / "a", tmp_path / "b"
        assert cli.main(["run", "--config", str(fast_config_path), "--out", str(a_root)]) == 0
        assert cli.main(["run", "--config", str(fast_config_path), "--out", str(b_root)]) == 0
        a, b = run_dir_of(a_root), run_dir_of(b_root)
        assert a.name == b.name
        assert (a / "timeseries.csv").read_bytes() == (b / "timeseries.csv").read_bytes()

    def test_env_var_default_root(self, fast_config_path, tmp_path, monkeypatch):
        root = tmp_path / "env_root"
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(root))
        assert cli.main(["run", "--config", str(fast_config_path)]) == 0
        assert root.exists()

    def test_dump_hamiltonian(self, fast_config_path, tmp_path):
        out_root = tmp_path / "out"
        rc = cli.main(
            ["run", "--config", str(fast_config_path), "--out", str(out_root), "--dump-hamiltonian"]
        )
        assert rc == 0
        run_dir = run_dir_of(out_root)
        lines = (run_dir / "hamiltonian_dense.csv").read_text().splitlines()
        assert lines[0] == "row,col,re,im"
        assert len(lines) > 4

    def test_per_site_flag(self, fast_config_path, tmp_path):
        out_root = tmp_path / "out"
        rc = cli.main(["run", "--config", str(fast_config_path), "--out", str(out_root), "--per-site"])
        assert rc == 0
        assert (run_dir_of(out_root) / "per_site.csv").exists()

    def test_help_documents_every_config_key(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["run", "--help"])
        text = capsys.readouterr().out
        for key in PARAM_DOCS:
            assert key in text, f"config key {key} missing from run --help"


class TestSpectrumCommand:
    def _make_run(self, fast_config_path, tmp_path):
        out_root = tmp_path / "out"
        assert cli.main(["run", "--config", str(fast_config_path), "--out", str(out_root)]) == 0
        return run_dir_of(out_root)

    def test_rewindow_changes_resolution(self, fast_config_path, tmp_path):
        run_dir = self._make_run(fast_config_path, tmp_path)
        manifest = load_manifest(run_dir)
        res_before = manifest["diagnostics"]["spectral"]["resolution_khz"]
        rc = cli.main(["spectrum", "--run-dir", str(run_dir), "--window", "0.5", "3.0"])
        assert rc == 0
        res_after = load_manifest(run_dir)["diagnostics"]["spectral"]["resolution_khz"]
        assert res_after == pytest.approx(res_before * 2.0 / 2.5, rel=1e-6)

    def test_same_window_identical_output(self, fast_config_path, tmp_path):
        run_dir = self._make_run(fast_config_path, tmp_path)
        before = (run_dir / "spectrum_internal.csv").read_bytes()
        assert cli.main(["spectrum", "--run-dir", str(run_dir)]) == 0
        assert (run_dir / "spectrum_internal.csv").read_bytes() == before

    def test_tampered_times_exit_1(self, fast_config_path, tmp_path):
        run_dir = self._make_run(fast_config_path, tmp_path)
        ts = run_dir / "timeseries.csv"
        lines = ts.read_text().splitlines()
        parts = lines[40].split(",")
        parts[0] = str(float(parts[0]) + 3e-3)
        lines[40] = ",".join(parts)
        ts.write_text("\n".join(lines) + "\n")
        assert cli.main(["spectrum", "--run-dir", str(run_dir)]) == 1


class TestClassifyCommand:
    def test_reclassify_prints_diagnostics(self, fast_config_path, tmp_path, capsys):
        out_root = tmp_path / "out"
        assert cli.main(["run", "--config", str(fast_config_path), "--out", str(out_root)]) == 0
        run_dir = run_dir_of(out_root)
        rc = cli.main(["classify", "--run-dir", str(run_dir)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "phase:" in printed
        assert "motional_raw_max" in printed


class TestSweepCommand:
    def test_sweep_runs_grid(self, tmp_path, capsys):
        spec = {
            "base": FAST_CONFIG,
            "axes": [{"name": "omega_trap_r", "values": [5.0, 10.0]}],
            "linkage": "free",
        }
        spec_path = tmp_path / "sweep.json"
        spec_path.write_text(json.dumps(spec))
        out_root = tmp_path / "sweep_out"
        rc = cli.main(["sweep", "--spec", str(spec_path), "--out", str(out_root), "--threads", "2"])
        assert rc == 0
        assert (out_root / "phase_diagram.csv").exists()
        assert len(list((out_root / "runs").glob("*/manifest.json"))) == 2


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert cli.main(["selftest"]) == 0
        printed = capsys.readouterr().out
        assert "PASS" in printed
        assert "FAIL" not in printed


class TestConsoleScript:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tweezersim.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "tweezersim" in proc.stdout
