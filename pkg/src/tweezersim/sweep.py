"""Parameter-grid expansion, run execution, and content-addressed persistence.

Every run lands in ``<root>/runs/<hash12>/`` with manifest.json,
timeseries.csv, spectrum_internal.csv, spectrum_motional.csv and
phasespace.csv.  The hash is the sha1 of the canonical user-units config, so
reruns of an unchanged config are skipped and sweeps are resumable.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from itertools import product
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import observables, spectral
from .evolve import EvolutionPlan, NumericalError, TrajectoryRecord, per_site_to_csv, run
from .params import (
    DEFAULT_CONSTANTS,
    KHZ,
    PARAM_DOCS,
    ParameterError,
    SystemConfig,
    derive,
    derive_oscillator_length,
)

MANIFEST_SCHEMA = 1
LINKED_BY_K = "linked_by_k"
FREE = "free"

RUN_FILES = {
    "timeseries": "timeseries.csv",
    "spectrum_internal": "spectrum_internal.csv",
    "spectrum_motional": "spectrum_motional.csv",
    "phasespace": "phasespace.csv",
}


@dataclass
class SweepSpec:
    """Base config plus axis definitions and the eta linkage mode."""

    base: dict
    axes: list  # [(name, [values...]), ...]
    linkage: str = FREE

    def __post_init__(self):
        if self.linkage not in (LINKED_BY_K, FREE):
            raise ParameterError(f"unknown linkage mode {self.linkage!r}")
        if not isinstance(self.axes, list) or not self.axes:
            raise ParameterError("sweep needs a non-empty axis list")
        names = [name for name, _ in self.axes]
        if len(set(names)) != len(names):
            raise ParameterError("duplicate sweep axes")
        for name, values in self.axes:
            if name not in PARAM_DOCS:
                raise ParameterError(f"unknown sweep axis {name!r}")
            if self.linkage == LINKED_BY_K and name in ("eta_g", "eta_r"):
                raise ParameterError("linked_by_k mode forbids explicit eta axes")
            if not isinstance(values, (list, tuple)):
                raise ParameterError(f"axis {name!r} needs a list of values")

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or "base" not in data or "axes" not in data:
            raise ParameterError("sweep spec JSON needs 'base' and 'axes'")
        axes = [(ax["name"], list(ax["values"])) for ax in data["axes"]]
        return cls(base=dict(data["base"]), axes=axes, linkage=data.get("linkage", FREE))


def _linked_wavevector(base: dict) -> float:
    """Anchor wavevector for linked mode: explicit k, or inferred from the
    base (eta_r, omega_trap_r) pair."""
    if base.get("laser_wavevector_k") is not None:
        return float(base["laser_wavevector_k"])
    if base.get("eta_r") is None or base.get("omega_trap_r") is None:
        raise ParameterError(
            "linked_by_k mode needs laser_wavevector_k or an (eta_r, omega_trap_r) anchor in base"
        )
    x0 = derive_oscillator_length(DEFAULT_CONSTANTS.atomic_mass, float(base["omega_trap_r"]) * KHZ)
    return math.sqrt(2.0) * float(base["eta_r"]) / x0


def expand_grid(spec: SweepSpec) -> list[dict]:
    """Cartesian product of the axes applied to the base config.

    In linked mode the anchor wavevector replaces any explicit etas, so each
    point's Lamb-Dicke parameters follow from its trap frequencies.  The
    virtual axis r_over_rb is resolved to spacing_r per point.
    """
    linked_k = _linked_wavevector(spec.base) if spec.linkage == LINKED_BY_K else None
    names = [name for name, _ in spec.axes]
    value_lists = [values for _, values in spec.axes]
    configs = []
    for combo in product(*value_lists):
        cfg = dict(spec.base)
        cfg.update(dict(zip(names, combo)))
        if linked_k is not None:
            cfg.pop("eta_g", None)
            cfg.pop("eta_r", None)
            cfg["laser_wavevector_k"] = linked_k
        if "r_over_rb" in cfg:
            cfg.pop("spacing_r", None)
        try:
            cfg = SystemConfig.from_dict(cfg).to_user_dict()
        except ParameterError:
            pass  # keep the raw point; the worker flags it as a failed run
        configs.append(cfg)
    return configs


def run_hash(config_dict: dict) -> str:
    """Deterministic content hash of a canonical user-units config."""
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(blob).hexdigest()


def perform_run(
    config_dict: dict,
    out_dir,
    plan_overrides: dict | None = None,
    per_site: bool = False,
    taper: str | None = None,
) -> dict:
    """Execute one trajectory and persist every run artifact; returns the manifest."""
    t_start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    config = SystemConfig.from_dict(config_dict)
    derived = derive(config)
    plan = EvolutionPlan.from_config(config, **(plan_overrides or {}))
    record = run(config, plan=plan, per_site=per_site)

    spec_int = spectral.dft(
        record.tau_z, record.times, config.steady_window, derived.rabi_period_t, taper=taper
    )
    spec_mot = spectral.dft(
        record.sigma_z, record.times, config.steady_window, derived.rabi_period_t, taper=taper
    )
    peaks = spectral.find_peaks(spec_int)
    label = spectral.classify(spec_int, spec_mot, peaks, config)
    trajectory = observables.phase_trajectory(record, config.steady_window)

    record.to_csv(out_dir / RUN_FILES["timeseries"])
    spec_int.to_csv(out_dir / RUN_FILES["spectrum_internal"])
    spec_mot.to_csv(out_dir / RUN_FILES["spectrum_motional"])
    _phasespace_to_csv(out_dir / RUN_FILES["phasespace"], record, config.steady_window, trajectory)
    outputs = dict(RUN_FILES)
    if per_site:
        per_site_to_csv(out_dir / "per_site.csv", record)
        outputs["per_site"] = "per_site.csv"

    manifest = {
        "schema": MANIFEST_SCHEMA,
        "status": "ok",
        "hash": run_hash(config.to_user_dict()),
        "config": config.to_user_dict(),
        "derived": derived.to_dict(),
        "diagnostics": {
            "max_norm_drift": record.max_norm_drift,
            "energy_drift_rel": record.energy_drift_rel,
            "n_samples": int(record.times.size),
            "spectral": label.diagnostics,
        },
        "phase": label.label.value,
        "warnings": list(record.warnings),
        "outputs": outputs,
        "wall_time_s": time.perf_counter() - t_start,
    }
    _write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def _phasespace_to_csv(path, record: TrajectoryRecord, window, trajectory: np.ndarray) -> None:
    times = np.asarray(record.times)
    sel = (times >= window[0]) & (times <= window[1])
    with open(path, "w", newline="") as fh:
        fh.write("t_over_T,sigma_x,sigma_y,tau_z\n")
        for t, (x, y, z) in zip(times[sel], trajectory):
            fh.write(f"{t:.17g},{x:.17g},{y:.17g},{z:.17g}\n")


def _write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(run_dir) -> dict:
    with open(Path(run_dir) / "manifest.json") as fh:
        return json.load(fh)


def _sweep_worker(job):
    config_dict, run_dir = job
    try:
        return perform_run(config_dict, run_dir)
    except (ParameterError, NumericalError, OSError) as exc:
        manifest = {
            "schema": MANIFEST_SCHEMA,
            "status": "failed",
            "hash": run_hash(config_dict),
            "config": config_dict,
            "error": f"{type(exc).__name__}: {exc}",
            "outputs": {},
        }
        try:
            Path(run_dir).mkdir(parents=True, exist_ok=True)
            _write_manifest(Path(run_dir) / "manifest.json", manifest)
        except OSError:
            pass
        return manifest


def execute_sweep(spec: SweepSpec, out_root, parallelism: int = 1) -> list[dict]:
    """Run every grid point; failures are isolated, completed runs are skipped.

    Results come back in grid order regardless of worker scheduling, and the
    sweep-level index is written once, after all workers finish.
    """
    out_root = Path(out_root)
    runs_root = out_root / "runs"
    runs_root.mkdir(parents=True, exist_ok=True)

    configs = expand_grid(spec)
    jobs = []
    manifests: list[dict | None] = [None] * len(configs)
    for i, cfg in enumerate(configs):
        run_dir = runs_root / run_hash(cfg)[:12]
        existing = run_dir / "manifest.json"
        if existing.exists():
            with open(existing) as fh:
                prior = json.load(fh)
            if prior.get("status") == "ok":
                prior["skipped"] = True
                manifests[i] = prior
                continue
        jobs.append((i, (cfg, str(run_dir))))

    if jobs:
        if parallelism <= 1:
            results = [_sweep_worker(job) for _, job in jobs]
        else:
            ctx = get_context("fork")
            with ctx.Pool(processes=min(parallelism, len(jobs))) as pool:
                results = pool.map(_sweep_worker, [job for _, job in jobs])
        for (i, _), manifest in zip(jobs, results):
            manifests[i] = manifest

    index = {
        "schema": MANIFEST_SCHEMA,
        "n_runs": len(manifests),
        "runs": [
            {"hash": m["hash"], "status": m["status"], "phase": m.get("phase")}
            for m in manifests
        ],
    }
    _write_manifest(out_root / "runs_index.json", index)
    rows = assemble_phase_diagram([m for m in manifests if m is not None], runs_root)
    phase_diagram_to_csv(out_root / "phase_diagram.csv", rows)
    return manifests


def assemble_phase_diagram(manifests: list[dict], runs_root=None) -> list[dict]:
    """Summary rows (omega_trap_r, eta_r, R/Rb, label, dominant peak, ratio).

    All manifests must share the steady-window settings; rows whose expected
    output files are missing are flagged instead of dropped.
    """
    rows = []
    windows = set()
    for m in manifests:
        if m.get("status") == "ok":
            windows.add(tuple(m["config"]["steady_window"]))
    if len(windows) > 1:
        raise ParameterError(f"mixed steady windows in one phase diagram: {sorted(windows)}")

    for m in manifests:
        cfg = m.get("config", {})
        derived = m.get("derived", {})
        spectral_diag = m.get("diagnostics", {}).get("spectral", {})
        rb = derived.get("blockade_radius_um")
        spacing = cfg.get("spacing_r")
        flagged = m.get("status") != "ok"
        if not flagged and runs_root is not None:
            run_dir = Path(runs_root) / m["hash"][:12]
            for rel in m.get("outputs", {}).values():
                if not (run_dir / rel).exists():
                    flagged = True
                    break
        rows.append(
            {
                "hash": m.get("hash", ""),
                "omega_trap_r_khz": cfg.get("omega_trap_r"),
                "eta_r": derived.get("eta_r"),
                "r_over_rb": (spacing / rb) if spacing and rb else None,
                "phase": m.get("phase", "n/a"),
                "dominant_freq_khz": spectral_diag.get("dominant_freq_khz"),
                "peak_ratio": spectral_diag.get("peak_ratio"),
                "flagged": flagged,
            }
        )
    return rows


def phase_diagram_to_csv(path, rows: list[dict]) -> None:
    cols = (
        "hash",
        "omega_trap_r_khz",
        "eta_r",
        "r_over_rb",
        "phase",
        "dominant_freq_khz",
        "peak_ratio",
        "flagged",
    )
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(int(v))
        if isinstance(v, float):
            return f"{v:.17g}"
        return str(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) for c in cols) + "\n")
