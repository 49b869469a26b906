import numpy as np
import pytest

from plotkit import figures, io
from conftest import write_run_dir


class TestLoadRun:
    def test_loads_all_tables(self, run_dir):
        run = io.load_run(run_dir)
        assert run.timeseries.shape[1] == 7
        assert run.phasespace.shape[1] == 4
        assert run.spectrum_internal.shape[1] == 2
        assert run.label == "LimitCycle"
        assert len(run.input_hash) == 64

    def test_hash_tracks_input_bytes(self, tmp_path):
        a = io.load_run(write_run_dir(tmp_path, "a"))
        b_dir = write_run_dir(tmp_path, "b")
        b = io.load_run(b_dir)
        assert a.input_hash == b.input_hash  # identical bytes, name-independent content
        with open(b_dir / "timeseries.csv", "a") as fh:
            fh.write("200.1,0,0,0,0,0,1\n")
        assert io.load_run(b_dir).input_hash != b.input_hash

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(io.RunDataError):
            io.load_run(tmp_path / "nothing")

    def test_wrong_columns_rejected(self, run_dir):
        (run_dir / "phasespace.csv").write_text("a,b\n1,2\n")
        with pytest.raises(io.RunDataError):
            io.load_run(run_dir)

    def test_ramp_profile(self):
        times = np.array([0.0, 5.0, 10.0, 50.0])
        profile = io.ramp_profile({"omega0": 10.0, "ramp_rate_r": 1.0}, times)
        assert np.allclose(profile, [0.0, 5.0, 10.0, 10.0])
        flat = io.ramp_profile({"omega0": 10.0, "ramp_rate_r": None}, times)
        assert np.allclose(flat, 10.0)


class TestClosureGap:
    def test_closed_loop_small_gap(self):
        theta = np.linspace(0.0, 12 * 2 * np.pi, 2400)
        loop = np.column_stack((np.cos(theta), np.sin(theta), 0.2 * np.sin(3 * theta)))
        gap, diameter, ratio = figures.closure_gap(loop)
        assert ratio < 0.01
        assert diameter == pytest.approx(np.linalg.norm([2.0, 2.0, 0.4]), rel=1e-6)

    def test_open_spiral_large_gap(self):
        theta = np.linspace(0.0, 6 * np.pi, 600)
        r = np.linspace(0.1, 1.0, 600)
        spiral = np.column_stack((r * np.cos(theta), r * np.sin(theta), r))
        _, _, ratio = figures.closure_gap(spiral)
        assert ratio > 0.05

    def test_degenerate_point(self):
        pts = np.zeros((100, 3))
        gap, diameter, ratio = figures.closure_gap(pts)
        assert gap == diameter == ratio == 0.0

    def test_too_short(self):
        with pytest.raises(io.RunDataError):
            figures.closure_gap(np.zeros((2, 3)))


class TestTimeseriesFigure:
    def test_broken_axis_has_five_rows(self, run_dir):
        fig = figures.build_timeseries_figure(io.load_run(run_dir))
        assert len(fig.axes) == 10  # five rows x (transient | steady)
        left = fig.axes[0]
        assert left.get_xlim()[1] == pytest.approx(10.0)  # ramp knee

    def test_no_break_single_axis(self, run_dir):
        fig = figures.build_timeseries_figure(io.load_run(run_dir), breaks=None)
        assert len(fig.axes) == 5

    def test_drive_panel_uses_manifest_ramp(self, run_dir):
        fig = figures.build_timeseries_figure(io.load_run(run_dir), breaks=None)
        line = fig.axes[0].lines[0]
        ydata = line.get_ydata()
        assert ydata[0] == 0.0
        assert ydata[-1] == 10.0

    def test_writes_png_and_svg_with_hash(self, run_dir, tmp_path):
        paths = figures.plot_timeseries(run_dir, tmp_path / "fig" / "timeseries")
        assert {p.suffix for p in paths} == {".png", ".svg"}
        run = io.load_run(run_dir)
        png = next(p for p in paths if p.suffix == ".png")
        svg = next(p for p in paths if p.suffix == ".svg")
        assert run.input_hash.encode() in png.read_bytes()
        assert run.input_hash in svg.read_text()


class TestSpectrumFigure:
    def test_two_panels(self, run_dir):
        fig = figures.build_spectrum_figure(io.load_run(run_dir))
        assert len(fig.axes) == 2

    def test_file_output(self, run_dir, tmp_path):
        paths = figures.plot_spectrum(run_dir, tmp_path / "spec", formats=("png",))
        assert len(paths) == 1 and paths[0].exists()


class TestPhase3dFigure:
    def test_single_run_single_panel(self, run_dir):
        fig = figures.build_phase3d_figure([io.load_run(run_dir)])
        assert len(fig.axes) == 1
        assert fig.axes[0].name == "3d"

    def test_montage_sorted_by_trap_and_eta(self, tmp_path):
        dirs = [
            write_run_dir(tmp_path, "high", omega_trap_r=14.0, eta_r=0.08),
            write_run_dir(tmp_path, "low", omega_trap_r=5.0, eta_r=0.14),
            write_run_dir(tmp_path, "mid", omega_trap_r=10.0, eta_r=0.1),
        ]
        fig = figures.build_phase3d_figure([io.load_run(d) for d in dirs])
        assert len(fig.axes) == 3
        titles = [ax.get_title() for ax in fig.axes]
        assert "=5" in titles[0] and "=10" in titles[1] and "=14" in titles[2]

    def test_annotates_label_and_gap(self, run_dir):
        fig = figures.build_phase3d_figure([io.load_run(run_dir)])
        title = fig.axes[0].get_title()
        assert "LimitCycle" in title
        assert "closure gap" in title
        assert "$f_1$=9.80 kHz" in title

    def test_z_axis_trajectory_renders_flat(self, tmp_path):
        z_only = np.column_stack(
            (np.zeros(500), np.zeros(500), -np.cos(np.linspace(0, 30, 500)))
        )
        d = write_run_dir(tmp_path, "rabi", phase="RabiOscillation", trajectory=z_only)
        fig = figures.build_phase3d_figure([io.load_run(d)], annotate_gap=False)
        x, y, z = fig.axes[0].lines[0].get_data_3d()
        assert np.all(x == 0.0) and np.all(y == 0.0)
        assert np.ptp(z) > 1.0

    def test_missing_file_raises(self, tmp_path, run_dir):
        (run_dir / "phasespace.csv").unlink()
        with pytest.raises(io.RunDataError):
            figures.plot_phase3d([run_dir], tmp_path / "fig")
