"""Readers for the documented run-directory layout.

A run directory holds manifest.json plus timeseries.csv, phasespace.csv,
spectrum_internal.csv and spectrum_motional.csv.  Nothing here recomputes
physics: figures are drawn from these bytes, and the sha256 over the consumed
files is stamped into every figure's metadata.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TIMESERIES_COLUMNS = ("t_over_T", "tau_z", "sigma_z", "sigma_x", "sigma_y", "energy", "norm")
PHASESPACE_COLUMNS = ("t_over_T", "sigma_x", "sigma_y", "tau_z")
SPECTRUM_COLUMNS = ("freq_khz", "amp")


class RunDataError(RuntimeError):
    """Raised when a run directory is missing or malformed."""


def _read_csv(path: Path, expected_columns) -> np.ndarray:
    if not path.exists():
        raise RunDataError(f"missing input file: {path}")
    with open(path) as fh:
        header = tuple(fh.readline().strip().split(","))
        if header != tuple(expected_columns):
            raise RunDataError(f"{path.name}: expected columns {expected_columns}, got {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(expected_columns):
        raise RunDataError(f"{path.name}: ragged rows")
    return data


@dataclass
class RunData:
    """One run directory, loaded verbatim."""

    run_dir: Path
    manifest: dict
    timeseries: np.ndarray  # columns TIMESERIES_COLUMNS
    phasespace: np.ndarray  # columns PHASESPACE_COLUMNS
    spectrum_internal: np.ndarray  # columns SPECTRUM_COLUMNS
    spectrum_motional: np.ndarray
    input_hash: str = ""

    def column(self, name: str) -> np.ndarray:
        return self.timeseries[:, TIMESERIES_COLUMNS.index(name)]

    @property
    def label(self) -> str:
        return self.manifest.get("phase", "n/a")

    @property
    def config(self) -> dict:
        return self.manifest.get("config", {})

    @property
    def spectral_diag(self) -> dict:
        return self.manifest.get("diagnostics", {}).get("spectral", {})


def load_run(run_dir) -> RunData:
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise RunDataError(f"not a run directory (no manifest.json): {run_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)

    files = [
        manifest_path,
        run_dir / "timeseries.csv",
        run_dir / "phasespace.csv",
        run_dir / "spectrum_internal.csv",
        run_dir / "spectrum_motional.csv",
    ]
    digest = hashlib.sha256()
    for path in files:
        if path.exists():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())

    return RunData(
        run_dir=run_dir,
        manifest=manifest,
        timeseries=_read_csv(files[1], TIMESERIES_COLUMNS),
        phasespace=_read_csv(files[2], PHASESPACE_COLUMNS),
        spectrum_internal=_read_csv(files[3], SPECTRUM_COLUMNS),
        spectrum_motional=_read_csv(files[4], SPECTRUM_COLUMNS),
        input_hash=digest.hexdigest(),
    )


def ramp_profile(config: dict, times_over_t: np.ndarray) -> np.ndarray:
    """Drive frequency in kHz along the recorded time axis.

    Presentation arithmetic on manifest values (linear ramp with a clamp);
    with a null ramp rate the drive is constant.
    """
    omega0 = float(config.get("omega0", 0.0))
    rate = config.get("ramp_rate_r")
    if rate is None:
        return np.full_like(np.asarray(times_over_t, dtype=float), omega0)
    return np.minimum(float(rate) * np.asarray(times_over_t, dtype=float), omega0)
