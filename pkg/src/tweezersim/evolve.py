"""Fixed-step RK4 integration of i dpsi/dt = H(t) psi (hbar = 1).

No renormalisation is applied while stepping: norm drift is reported as a
fidelity diagnostic.  A step that straddles the ramp knee is split there, so
every RK4 stage sees a smooth Omega(t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from ._kernels import rk4_step_kernel
from .hamiltonian import HamiltonianTerms, apply_compiled, build_hamiltonian
from .observables import ObservableEngine
from .params import DerivedParams, ParameterError, SystemConfig, derive, drive_omega, ramp_knee_time

EXACT_MAX_ATOMS = 3

TIMESERIES_COLUMNS = ("t_over_T", "tau_z", "sigma_z", "sigma_x", "sigma_y", "energy", "norm")


class NumericalError(RuntimeError):
    """Raised when the integrator produces non-finite amplitudes."""


@dataclass(frozen=True)
class EvolutionPlan:
    """Numerical schedule and monitor thresholds for one trajectory."""

    dt_over_t: float
    t_final_over_t: float
    record_stride: int = 10
    norm_tol: float = 1e-6
    energy_tol: float = 1e-6
    renormalize: bool = False

    def __post_init__(self):
        if self.dt_over_t <= 0:
            raise ParameterError("dt_over_t must be positive")
        if self.record_stride < 1:
            raise ParameterError("record_stride must be >= 1")
        if self.t_final_over_t < self.dt_over_t:
            raise ParameterError("t_final_over_t must be >= dt_over_t")

    @classmethod
    def from_config(cls, config: SystemConfig, **overrides) -> "EvolutionPlan":
        kwargs = {
            "dt_over_t": config.dt_over_t,
            "t_final_over_t": config.t_final_over_t,
            "record_stride": config.record_stride,
        }
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass
class TrajectoryRecord:
    """Sampled observables of one trajectory, times in units of T."""

    times: np.ndarray
    tau_z: np.ndarray
    sigma_z: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    energy: np.ndarray
    norm_history: np.ndarray
    max_norm_drift: float = 0.0
    energy_drift_rel: float | None = None
    warnings: list = field(default_factory=list)
    final_state: np.ndarray | None = None
    per_site_rows: list | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
            for row in zip(
                self.times, self.tau_z, self.sigma_z, self.sigma_x, self.sigma_y,
                self.energy, self.norm_history,
            ):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryRecord":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != TIMESERIES_COLUMNS:
                raise ParameterError(f"unexpected time-series columns: {header}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.shape[1] != len(TIMESERIES_COLUMNS):
            raise ParameterError("malformed time-series CSV")
        return cls(
            times=data[:, 0],
            tau_z=data[:, 1],
            sigma_z=data[:, 2],
            sigma_x=data[:, 3],
            sigma_y=data[:, 4],
            energy=data[:, 5],
            norm_history=data[:, 6],
        )


def _check_finite(psi: np.ndarray, t_over_t: float) -> None:
    if not np.all(np.isfinite(psi.view(np.float64))):
        raise NumericalError(
            f"non-finite amplitudes at t = {t_over_t:.6g} T; reduce dt or check parameters"
        )


def _step_span(compiled, config, derived, psi, t0, t1, knee, scratch):
    """Advance psi from t0 to t1 (seconds), splitting at the ramp knee."""
    h, acc, tmp = scratch
    if config.ramp_rate_r is not None and t0 < knee < t1:
        spans = ((t0, knee), (knee, t1))
    else:
        spans = ((t0, t1),)
    for a, b in spans:
        dt = b - a
        om1 = drive_omega(config, derived, a)
        om2 = drive_omega(config, derived, a + 0.5 * dt)
        om3 = drive_omega(config, derived, b)
        rk4_step_kernel(
            compiled.diag, compiled.s_masks, compiled.s_coef,
            compiled.r_masks, compiled.r_coef,
            om1, om2, om3, dt, psi, h, acc, tmp,
        )


def rk4_step(
    psi: np.ndarray,
    t: float,
    dt: float,
    terms: HamiltonianTerms,
    config: SystemConfig,
    derived: DerivedParams | None = None,
) -> np.ndarray:
    """One classical RK4 step from t to t + dt (seconds); returns a new state.

    The derivative is f(psi, t) = -i H(t) psi with H evaluated at t, t + dt/2
    and t + dt; no renormalisation.  Steps across the ramp knee are split.
    """
    if derived is None:
        derived = derive(config)
    compiled = terms.compiled()
    if psi.shape[0] != compiled.dim:
        raise hilbert.DimensionError("state length does not match the Hamiltonian")
    out = psi.astype(np.complex128, copy=True)
    scratch = tuple(np.empty_like(out) for _ in range(3))
    knee = ramp_knee_time(config, derived)
    _step_span(compiled, config, derived, out, t, t + dt, knee, scratch)
    _check_finite(out, (t + dt) / derived.rabi_period_t if derived.rabi_period_t else 0.0)
    return out


def run(
    config: SystemConfig,
    plan: EvolutionPlan | None = None,
    terms: HamiltonianTerms | None = None,
    per_site: bool = False,
) -> TrajectoryRecord:
    """Evolve the all-|g,0> state with the ramped drive, recording observables.

    Monitor breaches (norm drift, post-knee energy drift) are recorded as
    warnings; the run still completes.
    """
    derived = derive(config)
    if config.omega0 <= 0:
        raise ParameterError("run() needs omega0 > 0 to define the time unit T")
    if plan is None:
        plan = EvolutionPlan.from_config(config)
    if terms is None:
        terms = build_hamiltonian(config, derived)
    compiled = terms.compiled()
    engine = ObservableEngine(config.n_atoms)

    t_unit = derived.rabi_period_t
    dt_s = plan.dt_over_t * t_unit
    n_steps = int(round(plan.t_final_over_t / plan.dt_over_t))
    knee = ramp_knee_time(config, derived)

    psi = hilbert.initial_state(config.n_atoms)
    scratch = tuple(np.empty_like(psi) for _ in range(3))
    h_buf = np.empty_like(psi)

    sample_steps = list(range(0, n_steps + 1, plan.record_stride))
    times = np.empty(len(sample_steps))
    data = {name: np.empty(len(sample_steps)) for name in ("tau_z", "sigma_z", "sigma_x", "sigma_y", "energy", "norm")}
    per_site_rows = [] if per_site else None

    def record(slot: int, step: int) -> None:
        t_over_t = step * plan.dt_over_t
        t_s = step * dt_s
        _check_finite(psi, t_over_t)
        sample = engine.measure(psi, per_site=per_site)
        apply_compiled(compiled, psi, drive_omega(config, derived, t_s), out=h_buf)
        times[slot] = t_over_t
        data["tau_z"][slot] = sample.tau_z_total
        data["sigma_z"][slot] = sample.sigma_z_total
        data["sigma_x"][slot] = sample.sigma_x_total
        data["sigma_y"][slot] = sample.sigma_y_total
        data["energy"][slot] = np.vdot(psi, h_buf).real
        data["norm"][slot] = np.linalg.norm(psi)
        if per_site:
            per_site_rows.append((t_over_t, sample.per_site))

    record(0, 0)
    slot = 1
    for step in range(1, n_steps + 1):
        t0 = (step - 1) * dt_s
        t1 = step * dt_s
        _step_span(compiled, config, derived, psi, t0, t1, knee, scratch)
        if slot < len(sample_steps) and step == sample_steps[slot]:
            if plan.renormalize:
                psi /= np.linalg.norm(psi)
            record(slot, step)
            slot += 1

    record_out = TrajectoryRecord(
        times=times,
        tau_z=data["tau_z"],
        sigma_z=data["sigma_z"],
        sigma_x=data["sigma_x"],
        sigma_y=data["sigma_y"],
        energy=data["energy"],
        norm_history=data["norm"],
        final_state=psi,
    )
    record_out.max_norm_drift = float(np.max(np.abs(data["norm"] - 1.0)))
    if record_out.max_norm_drift > plan.norm_tol:
        record_out.warnings.append(
            f"norm drift {record_out.max_norm_drift:.3e} exceeds tolerance {plan.norm_tol:.1e}"
        )

    knee_over_t = knee / t_unit
    post = times >= knee_over_t - 1e-12
    if np.count_nonzero(post) >= 2:
        e_post = data["energy"][post]
        # Drift is normalised by ||H psi_final||, a state-based operator scale.
        apply_compiled(compiled, psi, config.omega0, out=h_buf)
        h_scale = float(np.linalg.norm(h_buf)) or 1.0
        record_out.energy_drift_rel = float(np.max(np.abs(e_post - e_post[0]))) / h_scale
        if record_out.energy_drift_rel > plan.energy_tol:
            record_out.warnings.append(
                f"post-ramp energy drift {record_out.energy_drift_rel:.3e} exceeds "
                f"tolerance {plan.energy_tol:.1e}"
            )

    record_out.per_site_rows = per_site_rows
    return record_out


def per_site_to_csv(path, record: TrajectoryRecord) -> None:
    """Optional per-site dump: t_over_T, site, tau_z, sigma_z, sigma_x, sigma_y."""
    rows = getattr(record, "per_site_rows", None)
    if rows is None:
        raise ParameterError("run() was not asked for per-site observables")
    with open(path, "w", newline="") as fh:
        fh.write("t_over_T,site,tau_z,sigma_z,sigma_x,sigma_y\n")
        for t_over_t, per_site in rows:
            n = len(per_site["tau_z"])
            for j in range(n):
                fh.write(
                    f"{t_over_t:.17g},{j},"
                    f"{per_site['tau_z'][j]:.17g},{per_site['sigma_z'][j]:.17g},"
                    f"{per_site['sigma_x'][j]:.17g},{per_site['sigma_y'][j]:.17g}\n"
                )


def exact_propagate(psi: np.ndarray, h_dense: np.ndarray, delta_t: float) -> np.ndarray:
    """exp(-i H dt) psi by eigendecomposition; oracle for small systems."""
    dim = psi.shape[0]
    if dim > hilbert.dimension(EXACT_MAX_ATOMS):
        raise ParameterError(f"exact propagation is limited to n_atoms <= {EXACT_MAX_ATOMS}")
    if h_dense.shape != (dim, dim):
        raise hilbert.DimensionError("dense Hamiltonian does not match the state")
    evals, evecs = np.linalg.eigh(h_dense)
    phases = np.exp(-1j * evals * delta_t)
    return evecs @ (phases * (evecs.conj().T @ psi))
