from plotkit import cli
from conftest import write_run_dir


class TestTimeseriesCommand:
    def test_writes_files(self, run_dir, tmp_path, capsys):
        rc = cli.main(
            ["timeseries", "--run-dir", str(run_dir), "--out", str(tmp_path / "ts"),
             "--format", "both"]
        )
        assert rc == 0
        printed = capsys.readouterr().out
        assert "ts.png" in printed and "ts.svg" in printed
        assert (tmp_path / "ts.png").exists() and (tmp_path / "ts.svg").exists()

    def test_no_break_flag(self, run_dir, tmp_path):
        rc = cli.main(
            ["timeseries", "--run-dir", str(run_dir), "--out", str(tmp_path / "flat"),
             "--no-break", "--format", "png"]
        )
        assert rc == 0

    def test_missing_run_dir_exits_1(self, tmp_path, capsys):
        rc = cli.main(
            ["timeseries", "--run-dir", str(tmp_path / "nope"), "--out", str(tmp_path / "x")]
        )
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestSpectrumCommand:
    def test_writes_files(self, run_dir, tmp_path):
        rc = cli.main(
            ["spectrum", "--run-dir", str(run_dir), "--out", str(tmp_path / "sp"),
             "--format", "svg"]
        )
        assert rc == 0
        assert (tmp_path / "sp.svg").exists()


class TestPhase3dCommand:
    def test_single_run(self, run_dir, tmp_path):
        rc = cli.main(
            ["phase3d", "--run-dirs", str(run_dir), "--out", str(tmp_path / "p3"),
             "--format", "png"]
        )
        assert rc == 0
        assert (tmp_path / "p3.png").exists()


class TestMontageCommand:
    def test_requires_two_runs(self, run_dir, tmp_path, capsys):
        rc = cli.main(
            ["montage", "--run-dirs", str(run_dir), "--out", str(tmp_path / "m")]
        )
        assert rc == 1
        assert "two run directories" in capsys.readouterr().err

    def test_montage_of_three(self, tmp_path):
        dirs = [
            str(write_run_dir(tmp_path, f"r{i}", omega_trap_r=5.0 + i))
            for i in range(3)
        ]
        rc = cli.main(
            ["montage", "--run-dirs", *dirs, "--out", str(tmp_path / "m"), "--format", "png"]
        )
        assert rc == 0
        assert (tmp_path / "m.png").exists()
