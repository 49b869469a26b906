"""Synthetic run directories following the documented layout."""

import json

import numpy as np
import pytest


def write_run_dir(
    root,
    name="run",
    phase="LimitCycle",
    omega_trap_r=10.0,
    eta_r=0.1,
    dominant_freq=9.8,
    trajectory=None,
    n_samples=2001,
    ramp_rate=1.0,
    steady_window=(160.0, 200.0),
):
    """Write a minimal, self-consistent run directory and return its path."""
    run_dir = root / name
    run_dir.mkdir(parents=True, exist_ok=True)
    times = np.linspace(0.0, 200.0, n_samples)
    tau_z = -np.cos(2 * np.pi * times)
    sigma_z = np.full_like(times, -1.0)
    sigma_x = 0.3 * np.sin(0.05 * 2 * np.pi * times)
    sigma_y = 0.3 * np.cos(0.05 * 2 * np.pi * times)
    with open(run_dir / "timeseries.csv", "w") as fh:
        fh.write("t_over_T,tau_z,sigma_z,sigma_x,sigma_y,energy,norm\n")
        for row in zip(times, tau_z, sigma_z, sigma_x, sigma_y):
            fh.write(",".join(f"{v:.17g}" for v in row) + ",0,1\n")

    if trajectory is None:
        theta = np.linspace(0.0, 20 * 2 * np.pi, 1500)
        trajectory = np.column_stack(
            (0.4 * np.cos(theta), 0.4 * np.sin(theta), -0.5 + 0.1 * np.sin(2 * theta))
        )
    with open(run_dir / "phasespace.csv", "w") as fh:
        fh.write("t_over_T,sigma_x,sigma_y,tau_z\n")
        t_traj = np.linspace(*steady_window, len(trajectory))
        for t, (x, y, z) in zip(t_traj, trajectory):
            fh.write(f"{t:.17g},{x:.17g},{y:.17g},{z:.17g}\n")

    freqs = np.linspace(-50.0, 50.0, 401)
    amp_int = np.exp(-0.5 * ((np.abs(freqs) - dominant_freq) / 0.2) ** 2)
    amp_mot = 0.01 * np.exp(-0.5 * (freqs / 0.4) ** 2)
    for fname, amp in (("spectrum_internal.csv", amp_int), ("spectrum_motional.csv", amp_mot)):
        with open(run_dir / fname, "w") as fh:
            fh.write("freq_khz,amp\n")
            for f, a in zip(freqs, amp):
                fh.write(f"{f:.17g},{a:.17g}\n")

    manifest = {
        "schema": 1,
        "status": "ok",
        "hash": "f" * 40,
        "phase": phase,
        "config": {
            "n_atoms": 2,
            "omega0": 10.0,
            "ramp_rate_r": ramp_rate,
            "omega_trap_g": 10.0,
            "omega_trap_r": omega_trap_r,
            "eta_r": eta_r,
            "steady_window": list(steady_window),
        },
        "derived": {"eta_r": eta_r, "regime": "Weak"},
        "diagnostics": {
            "max_norm_drift": 1e-10,
            "spectral": {"dominant_freq_khz": dominant_freq, "resolution_khz": 0.25},
        },
        "outputs": {
            "timeseries": "timeseries.csv",
            "phasespace": "phasespace.csv",
            "spectrum_internal": "spectrum_internal.csv",
            "spectrum_motional": "spectrum_motional.csv",
        },
    }
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return run_dir


@pytest.fixture
def run_dir(tmp_path):
    return write_run_dir(tmp_path)
