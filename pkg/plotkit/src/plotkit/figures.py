"""Figure builders: broken-axis time-series panels, two-sided spectra, and
3D phase-space trajectories with montage layout.

Figures annotate the phase label and dominant frequencies from the manifest
rather than re-deriving them, and every output file carries the sha256 of the
input bytes in its metadata.  build_* functions return live matplotlib
figures; the plot_* wrappers load, build, save, and close.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import RunData, RunDataError, load_run, ramp_profile

TIMESERIES_PANELS = (
    ("drive", r"$\Omega(t)/2\pi$ [kHz]"),
    ("tau_z", r"$\langle\tau_T^z\rangle$"),
    ("sigma_z", r"$\langle\sigma_T^z\rangle$"),
    ("sigma_x", r"$\langle\sigma_T^x\rangle$"),
    ("sigma_y", r"$\langle\sigma_T^y\rangle$"),
)

HASH_KEY = "inputs-sha256"


def save_figure(fig, out_base, formats, input_hash) -> list[Path]:
    """Write out_base.<fmt> for each format, stamping the input hash."""
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out_base.with_suffix(f".{fmt}")
        if fmt == "png":
            metadata = {HASH_KEY: input_hash}
        else:
            metadata = {"Description": f"{HASH_KEY}:{input_hash}"}
        fig.savefig(path, format=fmt, metadata=metadata, dpi=150)
        written.append(path)
    plt.close(fig)
    return written


def default_breaks(run: RunData):
    """Transient and steady ranges: ramp-up interval and the steady window."""
    cfg = run.config
    window = cfg.get("steady_window")
    if window is None:
        return None
    omega0 = cfg.get("omega0")
    rate = cfg.get("ramp_rate_r")
    knee = float(omega0) / float(rate) if rate else 0.0
    transient_hi = max(knee, 1.0)
    if transient_hi >= float(window[0]):
        return None
    return (0.0, transient_hi), (float(window[0]), float(window[1]))


def _panel_series(run: RunData, name: str, times: np.ndarray) -> np.ndarray:
    if name == "drive":
        return ramp_profile(run.config, times)
    return run.column(name)


def build_timeseries_figure(run: RunData, breaks="auto"):
    """Five stacked panels (drive, tau_z, sigma_z, sigma_x, sigma_y).

    breaks: "auto" uses the ramp interval and the steady window from the
    manifest; None draws single full-range axes; or pass ((lo1, hi1),
    (lo2, hi2)) in units of T.
    """
    times = run.column("t_over_T")
    if breaks == "auto":
        breaks = default_breaks(run)

    n_rows = len(TIMESERIES_PANELS)
    if breaks is None:
        fig, axes = plt.subplots(n_rows, 1, figsize=(7.0, 9.0), sharex=True)
        for ax, (name, label) in zip(axes, TIMESERIES_PANELS):
            ax.plot(times, _panel_series(run, name, times), lw=0.7)
            ax.set_ylabel(label)
        axes[-1].set_xlabel(r"$t/T$")
    else:
        (lo1, hi1), (lo2, hi2) = breaks
        fig, axes = plt.subplots(
            n_rows, 2, figsize=(7.0, 9.0), sharey="row",
            gridspec_kw={"width_ratios": [1.0, 1.6], "wspace": 0.06},
        )
        for (name, label), (ax_l, ax_r) in zip(TIMESERIES_PANELS, axes):
            series = _panel_series(run, name, times)
            ax_l.plot(times, series, lw=0.7)
            ax_r.plot(times, series, lw=0.7)
            ax_l.set_xlim(lo1, hi1)
            ax_r.set_xlim(lo2, hi2)
            ax_l.set_ylabel(label)
            ax_l.spines.right.set_visible(False)
            ax_r.spines.left.set_visible(False)
            ax_r.tick_params(left=False, labelleft=False)
            d = 0.012
            kw = dict(transform=ax_l.transAxes, color="k", clip_on=False, lw=0.8)
            ax_l.plot((1 - d, 1 + d), (-d, +d), **kw)
            ax_l.plot((1 - d, 1 + d), (1 - d, 1 + d), **kw)
            kw["transform"] = ax_r.transAxes
            ax_r.plot((-d, +d), (-d, +d), **kw)
            ax_r.plot((-d, +d), (1 - d, 1 + d), **kw)
        for ax in axes[-1]:
            ax.set_xlabel(r"$t/T$")
    fig.suptitle(f"{run.label}   [{run.run_dir.name}]", fontsize=10)
    fig.align_ylabels()
    return fig


def plot_timeseries(run_dir, out_base, breaks="auto", formats=("png", "svg")) -> list[Path]:
    run = load_run(run_dir)
    fig = build_timeseries_figure(run, breaks=breaks)
    return save_figure(fig, out_base, formats, run.input_hash)


def build_spectrum_figure(run: RunData):
    """Two-sided normalised spectra of the internal and motional densities."""
    fig, axes = plt.subplots(2, 1, figsize=(6.0, 5.5), sharex=True)
    for ax, data, label in (
        (axes[0], run.spectrum_internal, "internal"),
        (axes[1], run.spectrum_motional, "motional"),
    ):
        ax.plot(data[:, 0], data[:, 1], lw=0.7)
        ax.set_ylabel(f"normalised DFT ({label})")
    diag = run.spectral_diag
    if "dominant_freq_khz" in diag:
        for sign in (1.0, -1.0):
            axes[0].axvline(sign * diag["dominant_freq_khz"], color="tab:red", lw=0.5, ls="--")
    axes[1].set_xlabel("f [kHz]")
    axes[0].set_title(f"{run.label}   [{run.run_dir.name}]", fontsize=10)
    return fig


def plot_spectrum(run_dir, out_base, formats=("png", "svg")) -> list[Path]:
    run = load_run(run_dir)
    fig = build_spectrum_figure(run)
    return save_figure(fig, out_base, formats, run.input_hash)


def closure_gap(points: np.ndarray, exclude_fraction=0.02) -> tuple[float, float, float]:
    """Nearest-return metric: (gap, trajectory diameter, gap/diameter).

    gap is the distance from the final point to its nearest predecessor,
    excluding the trailing exclude_fraction of samples (at least 10) so the
    immediate history does not trivially win.  A closed loop traversed many
    times yields a small ratio.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise RunDataError("closure gap needs a trajectory of at least 3 points")
    diameter = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    tail = max(10, int(math.ceil(exclude_fraction * len(pts))))
    candidates = pts[: len(pts) - tail]
    if len(candidates) == 0:
        raise RunDataError("trajectory too short for the exclusion window")
    gap = float(np.min(np.linalg.norm(candidates - pts[-1], axis=1)))
    ratio = gap / diameter if diameter > 0 else 0.0
    return gap, diameter, ratio


def _sort_key(run: RunData):
    cfg = run.config
    derived = run.manifest.get("derived", {})
    return (cfg.get("omega_trap_r", 0.0), derived.get("eta_r", 0.0))


def build_phase3d_figure(runs: list[RunData], annotate_gap=True):
    """3D (sigma_x, sigma_y, tau_z) trajectory per run, montage for several.

    Panels are arranged by (omega_trap_r, eta_r); each is annotated with the
    manifest's phase label and dominant frequency plus the closure-gap ratio.
    """
    runs = sorted(runs, key=_sort_key)
    if not runs:
        raise RunDataError("phase-space figure needs at least one run")
    n = len(runs)
    n_cols = min(3, n)
    n_rows = math.ceil(n / n_cols)
    fig = plt.figure(figsize=(4.0 * n_cols, 3.6 * n_rows))
    for idx, run in enumerate(runs, start=1):
        ax = fig.add_subplot(n_rows, n_cols, idx, projection="3d")
        x, y, z = run.phasespace[:, 1], run.phasespace[:, 2], run.phasespace[:, 3]
        ax.plot(x, y, z, lw=0.5)
        ax.set_xlabel(r"$\langle\sigma_T^x\rangle$", fontsize=8)
        ax.set_ylabel(r"$\langle\sigma_T^y\rangle$", fontsize=8)
        ax.set_zlabel(r"$\langle\tau_T^z\rangle$", fontsize=8)
        ax.tick_params(labelsize=6)
        cfg = run.config
        diag = run.spectral_diag
        title = (
            f"{run.label}  "
            f"$\\omega_R/2\\pi$={cfg.get('omega_trap_r', float('nan')):g} kHz, "
            f"$\\eta_R$={run.manifest.get('derived', {}).get('eta_r', float('nan')):.3g}"
        )
        if "dominant_freq_khz" in diag:
            title += f"\n$f_1$={diag['dominant_freq_khz']:.2f} kHz"
        if annotate_gap:
            _, _, ratio = closure_gap(run.phasespace[:, 1:4])
            title += f", closure gap {100 * ratio:.2f}%"
        ax.set_title(title, fontsize=7)
    fig.tight_layout()
    return fig


def plot_phase3d(run_dirs, out_base, formats=("png", "svg"), annotate_gap=True) -> list[Path]:
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    runs = [load_run(d) for d in run_dirs]
    fig = build_phase3d_figure(runs, annotate_gap=annotate_gap)
    combined = hashlib.sha256("".join(r.input_hash for r in sorted(runs, key=_sort_key)).encode()).hexdigest()
    return save_figure(fig, out_base, formats, combined)
