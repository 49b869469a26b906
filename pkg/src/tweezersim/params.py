"""Unit system, physical constants, and derived model parameters.

Internal conventions (fixed once, at config load):
    * hbar = 1, so every energy is an angular frequency in rad/s.
    * Angular frequencies in rad/s; the user-facing config and CLI take plain
      kHz and the 2*pi is applied here.
    * Interaction lengths (trap spacing, blockade radius) in micrometres,
      oscillator lengths in metres.
    * Times are exchanged with the outside world in units of the drive period
      T = 2*pi/omega0 and converted to seconds internally.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
YB171_MASS = 171 * ATOMIC_MASS_UNIT  # kg
TWO_PI = 2.0 * math.pi

KHZ = 2.0 * math.pi * 1e3  # rad/s per user-facing kHz
MHZ_UM6 = 2.0 * math.pi * 1e6  # rad/s um^6 per user-facing MHz um^6


class ParameterError(ValueError):
    """Raised for invalid or inconsistent configuration values."""


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


class Regime(enum.Enum):
    WEAK = "Weak"
    BLOCKADE = "Blockade"
    STRONG = "Strong"


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    atomic_mass: float = YB171_MASS

    def __post_init__(self):
        if self.hbar <= 0 or self.atomic_mass <= 0:
            raise ParameterError("physical constants must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()

# User-facing config keys, their units, and defaults.  Single source of truth
# for the JSON schema, the CLI help text, and the README table.
PARAM_DOCS = {
    "n_atoms": "atom count (the chain has 2*n_atoms internal+motional sites)",
    "spacing_r": "tweezer separation R in um (exclusive with r_over_rb)",
    "r_over_rb": "tweezer separation as a multiple of the blockade radius",
    "c6": "van der Waals coefficient in MHz*um^6 (angular convention)",
    "omega0": "peak Rabi frequency Omega0/2pi in kHz",
    "ramp_rate_r": "linear ramp rate r/2pi in kHz; null disables the ramp",
    "omega_trap_g": "ground-state trap frequency in kHz",
    "omega_trap_r": "Rydberg-state trap frequency in kHz",
    "laser_wavevector_k": "drive laser wavevector in 1/m (exclusive with eta_g/eta_r)",
    "eta_g": "explicit ground-state Lamb-Dicke parameter (with eta_r)",
    "eta_r": "explicit Rydberg-state Lamb-Dicke parameter (with eta_g)",
    "dt_over_t": "integrator step in units of the drive period T",
    "t_final_over_t": "evolution horizon in units of T",
    "steady_window": "[lo, hi] steady-state analysis window in units of T",
    "boundary": "chain boundary condition: open or periodic",
    "record_stride": "steps between recorded observable samples",
}

_FREQ_KEYS = ("omega0", "ramp_rate_r", "omega_trap_g", "omega_trap_r")


@dataclass(frozen=True)
class SystemConfig:
    """Full physical + numerical parameter set for one run (internal units)."""

    n_atoms: int
    spacing_r: float  # um
    omega0: float  # rad/s
    omega_trap_g: float  # rad/s
    omega_trap_r: float  # rad/s
    ramp_rate_r: float | None = TWO_PI * 1e3  # rad/s; None = constant drive
    c6: float = MHZ_UM6  # rad/s um^6
    laser_wavevector_k: float | None = None  # 1/m
    eta_g: float | None = None
    eta_r: float | None = None
    dt_over_t: float = 1e-3
    t_final_over_t: float = 200.0
    steady_window: tuple[float, float] = (160.0, 200.0)
    boundary: str = "open"
    record_stride: int = 10

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ParameterError("n_atoms must be >= 1")
        if self.spacing_r <= 0:
            raise ParameterError("spacing_r must be positive")
        if self.omega0 < 0:
            raise ParameterError("omega0 must be non-negative")
        if self.ramp_rate_r is not None and self.ramp_rate_r <= 0:
            raise ParameterError("ramp_rate_r must be positive (or null for constant drive)")
        if self.omega_trap_g <= 0 or self.omega_trap_r <= 0:
            raise ParameterError("trap frequencies must be positive")
        if self.c6 < 0:
            raise ParameterError("c6 must be non-negative")
        if self.dt_over_t <= 0:
            raise ParameterError("dt_over_t must be positive")
        if self.t_final_over_t < self.dt_over_t:
            raise ParameterError("t_final_over_t must be >= dt_over_t")
        has_k = self.laser_wavevector_k is not None
        has_eta = self.eta_g is not None or self.eta_r is not None
        if has_k == has_eta:
            raise ParameterError(
                "exactly one of laser_wavevector_k or the (eta_g, eta_r) pair must be set"
            )
        if has_eta and (self.eta_g is None or self.eta_r is None):
            raise ParameterError("eta_g and eta_r must be given together")
        if has_eta and (self.eta_g < 0 or self.eta_r < 0):
            raise ParameterError("explicit Lamb-Dicke parameters must be non-negative")
        if has_k and self.laser_wavevector_k < 0:
            raise ParameterError("laser_wavevector_k must be non-negative")
        lo, hi = self.steady_window
        if not (0.0 <= lo < hi <= self.t_final_over_t):
            raise ParameterError("steady_window must satisfy 0 <= lo < hi <= t_final_over_t")
        if self.boundary not in ("open", "periodic"):
            raise ParameterError("boundary must be 'open' or 'periodic'")
        if self.record_stride < 1:
            raise ParameterError("record_stride must be >= 1")
        object.__setattr__(self, "steady_window", (float(lo), float(hi)))

    # -- user-facing (kHz / MHz um^6) representation --------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        """Build a config from a user-units dict (JSON schema of PARAM_DOCS)."""
        unknown = set(data) - set(PARAM_DOCS)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        d = dict(data)
        if "spacing_r" in d and "r_over_rb" in d:
            raise ParameterError("give either spacing_r or r_over_rb, not both")

        kwargs = {}
        kwargs["n_atoms"] = int(d.get("n_atoms", 1))
        for key in _FREQ_KEYS:
            if key in d:
                val = d[key]
                kwargs[key] = None if val is None else float(val) * KHZ
        kwargs.setdefault("omega0", TWO_PI * 1e4)
        kwargs.setdefault("omega_trap_g", TWO_PI * 1e4)
        kwargs.setdefault("omega_trap_r", TWO_PI * 1e4)
        if "c6" in d:
            kwargs["c6"] = float(d["c6"]) * MHZ_UM6
        if "laser_wavevector_k" in d and d["laser_wavevector_k"] is not None:
            kwargs["laser_wavevector_k"] = float(d["laser_wavevector_k"])
        for key in ("eta_g", "eta_r"):
            if key in d and d[key] is not None:
                kwargs[key] = float(d[key])
        if "laser_wavevector_k" not in kwargs and "eta_g" not in kwargs and "eta_r" not in kwargs:
            kwargs["eta_g"] = 0.1
            kwargs["eta_r"] = 0.1
        for key in ("dt_over_t", "t_final_over_t"):
            if key in d:
                kwargs[key] = float(d[key])
        if "steady_window" in d:
            lo, hi = d["steady_window"]
            kwargs["steady_window"] = (float(lo), float(hi))
        else:
            # Last fifth of the horizon; (160, 200) for the default horizon.
            t_final = kwargs.get("t_final_over_t", 200.0)
            kwargs["steady_window"] = (0.8 * t_final, t_final)
        if "boundary" in d:
            kwargs["boundary"] = str(d["boundary"])
        if "record_stride" in d:
            kwargs["record_stride"] = int(d["record_stride"])

        if "r_over_rb" in d:
            c6 = kwargs.get("c6", MHZ_UM6)
            omega0 = kwargs["omega0"]
            if c6 <= 0 or omega0 <= 0:
                raise ParameterError("r_over_rb requires positive c6 and omega0")
            kwargs["spacing_r"] = float(d["r_over_rb"]) * blockade_radius(c6, omega0)
        elif "spacing_r" in d:
            kwargs["spacing_r"] = float(d["spacing_r"])
        else:
            c6 = kwargs.get("c6", MHZ_UM6)
            kwargs["spacing_r"] = 4.0 * blockade_radius(c6, kwargs["omega0"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "SystemConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"malformed config JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError("config JSON must be an object")
        return cls.from_dict(data)

    def to_user_dict(self) -> dict:
        """Canonical user-units echo (kHz, MHz um^6, um); hashed into manifests.

        Converted values are rounded to 12 significant digits so the echo is
        a fixed point of from_dict/to_user_dict and hashes stay stable.
        """
        out = {
            "n_atoms": self.n_atoms,
            "spacing_r": self.spacing_r,
            "c6": _round12(self.c6 / MHZ_UM6),
            "omega0": _round12(self.omega0 / KHZ),
            "ramp_rate_r": None if self.ramp_rate_r is None else _round12(self.ramp_rate_r / KHZ),
            "omega_trap_g": _round12(self.omega_trap_g / KHZ),
            "omega_trap_r": _round12(self.omega_trap_r / KHZ),
            "dt_over_t": self.dt_over_t,
            "t_final_over_t": self.t_final_over_t,
            "steady_window": list(self.steady_window),
            "boundary": self.boundary,
            "record_stride": self.record_stride,
        }
        if self.laser_wavevector_k is not None:
            out["laser_wavevector_k"] = self.laser_wavevector_k
        else:
            out["eta_g"] = self.eta_g
            out["eta_r"] = self.eta_r
        return out

    def override(self, **user_updates) -> "SystemConfig":
        """Apply user-units overrides (CLI flags) on top of this config."""
        base = self.to_user_dict()
        if "spacing_r" in user_updates or "r_over_rb" in user_updates:
            base.pop("spacing_r", None)
        if "laser_wavevector_k" in user_updates:
            base.pop("eta_g", None)
            base.pop("eta_r", None)
        if "eta_g" in user_updates or "eta_r" in user_updates:
            base.pop("laser_wavevector_k", None)
        base.update(user_updates)
        return SystemConfig.from_dict(base)


@dataclass(frozen=True)
class DerivedParams:
    """Every derived scalar of the model, computed once per config."""

    x0_g: float  # m
    x0_r: float  # m
    eta_g: float
    eta_r: float
    eta_gr: float
    zeta: float
    rabi_period_t: float  # s
    blockade_radius_rb: float  # um
    v0: float  # rad/s
    v1: float  # rad/s
    v2: float  # rad/s
    regime: Regime

    def to_dict(self) -> dict:
        out = {
            "x0_g_m": self.x0_g,
            "x0_r_m": self.x0_r,
            "eta_g": self.eta_g,
            "eta_r": self.eta_r,
            "eta_gr": self.eta_gr,
            "zeta": self.zeta,
            "rabi_period_s": self.rabi_period_t,
            "blockade_radius_um": self.blockade_radius_rb,
            "v0_rad_s": self.v0,
            "v1_rad_s": self.v1,
            "v2_rad_s": self.v2,
            "regime": self.regime.value,
        }
        return out


def derive_oscillator_length(mass: float, omega_trap: float, hbar: float = HBAR) -> float:
    """Harmonic oscillator length sqrt(hbar / (m * omega)), in metres."""
    if mass <= 0 or omega_trap <= 0 or hbar <= 0:
        raise ParameterError("oscillator length needs strictly positive mass and frequency")
    return math.sqrt(hbar / (mass * omega_trap))


def derive_lamb_dicke(k: float, x0: float) -> float:
    """Lamb-Dicke parameter k * x0 / sqrt(2)."""
    if k < 0 or x0 <= 0:
        raise ParameterError("lamb-dicke derivation needs k >= 0 and x0 > 0")
    return k * x0 / math.sqrt(2.0)


def derive_franck_condon(x0_g: float, x0_r: float, k: float) -> tuple[float, float]:
    """Gaussian-overlap width factor zeta and effective Lamb-Dicke eta_gr.

    zeta is the dimensionless normalisation sqrt(2*x0g*x0r / (x0g^2 + x0r^2))
    of the two-width ground-state overlap; it equals 1 for equal traps.  The
    recoil kick suppresses the overlap by exp(-eta_gr^2 / 2) with
    eta_gr^2 = k^2 x0g^2 x0r^2 / (x0g^2 + x0r^2).
    """
    if x0_g <= 0 or x0_r <= 0 or k < 0:
        raise ParameterError("franck-condon factors need positive oscillator lengths")
    denom = x0_g * x0_g + x0_r * x0_r
    zeta = math.sqrt(2.0 * x0_g * x0_r / denom)
    eta_gr = math.sqrt(k * k * x0_g * x0_g * x0_r * x0_r / denom)
    return zeta, eta_gr


def blockade_radius(c6: float, omega0: float) -> float:
    """Rydberg blockade radius (c6 / omega0)^(1/6) in um (both angular)."""
    if c6 <= 0 or omega0 <= 0:
        raise ParameterError("blockade radius needs positive c6 and omega0")
    return (c6 / omega0) ** (1.0 / 6.0)


def classify_regime(spacing_r: float, rb: float) -> Regime:
    """Weak iff R > Rb, Blockade iff |R - Rb| <= 1e-9 Rb, else Strong."""
    if abs(spacing_r - rb) <= 1e-9 * rb:
        return Regime.BLOCKADE
    return Regime.WEAK if spacing_r > rb else Regime.STRONG


def vdw_coefficients(c6: float, spacing_r: float, x0: float) -> tuple[float, float, float]:
    """Second-order Taylor coefficients of c6/|R + dr|^6 about the trap centres.

    x0 must be in the same length unit as spacing_r.  Returns
    (v0, v1, v2) = (c6/R^6, -6 c6 x0 / R^7, 42 c6 x0^2 / R^8).
    """
    if spacing_r == 0:
        raise ParameterError("vdW expansion is singular at zero separation")
    if spacing_r < 0:
        raise ParameterError("spacing_r must be positive")
    r6 = spacing_r**6
    v0 = c6 / r6
    v1 = -6.0 * c6 * x0 / (r6 * spacing_r)
    v2 = 42.0 * c6 * x0 * x0 / (r6 * spacing_r * spacing_r)
    return v0, v1, v2


def ramp_omega(t: float, ramp_rate_r: float, omega0: float, rabi_period_t: float) -> float:
    """Linear drive ramp min(r*t/T, omega0); continuous and nondecreasing."""
    if t < 0:
        raise ParameterError("ramp time must be non-negative")
    return min(ramp_rate_r * t / rabi_period_t, omega0)


def drive_omega(config: SystemConfig, derived: "DerivedParams", t: float) -> float:
    """Omega(t) for a config; a null ramp rate means constant peak drive."""
    if config.ramp_rate_r is None:
        return config.omega0
    return ramp_omega(t, config.ramp_rate_r, config.omega0, derived.rabi_period_t)


def ramp_knee_time(config: SystemConfig, derived: "DerivedParams") -> float:
    """Earliest time (s) at which the ramp reaches the peak drive."""
    if config.ramp_rate_r is None or config.omega0 == 0:
        return 0.0
    return derived.rabi_period_t * config.omega0 / config.ramp_rate_r


def derive(config: SystemConfig, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> DerivedParams:
    """Compute every derived scalar for a config.

    In linked mode (wavevector given) the Lamb-Dicke parameters follow from
    k and the trap lengths, and the interaction displacement length is the
    Rydberg oscillator length x0_r.  With an explicit (eta_g, eta_r) override
    the displacement length is the recoil-consistent sqrt(2)*eta_r/k_eff with
    k_eff inferred from the ground-state pair, so every motional coupling
    vanishes exactly in the decoupled limit eta_g = eta_r = 0.
    """
    x0_g = derive_oscillator_length(constants.atomic_mass, config.omega_trap_g, constants.hbar)
    x0_r = derive_oscillator_length(constants.atomic_mass, config.omega_trap_r, constants.hbar)

    if config.laser_wavevector_k is not None:
        k = config.laser_wavevector_k
        eta_g = derive_lamb_dicke(k, x0_g)
        eta_r = derive_lamb_dicke(k, x0_r)
        zeta, eta_gr = derive_franck_condon(x0_g, x0_r, k)
        x_disp = x0_r if eta_r > 0 else 0.0
    else:
        eta_g = config.eta_g
        eta_r = config.eta_r
        zeta, _ = derive_franck_condon(x0_g, x0_r, 0.0)
        if eta_g > 0 and eta_r > 0:
            eta_gr = math.sqrt(2.0 * eta_g**2 * eta_r**2 / (eta_g**2 + eta_r**2))
        else:
            eta_gr = 0.0
        if eta_g > 0:
            k_eff = math.sqrt(2.0) * eta_g / x0_g
        elif eta_r > 0:
            k_eff = math.sqrt(2.0) * eta_r / x0_r
        else:
            k_eff = 0.0
        x_disp = math.sqrt(2.0) * eta_r / k_eff if k_eff > 0 else 0.0

    rabi_period = TWO_PI / config.omega0 if config.omega0 > 0 else math.inf
    if config.c6 > 0 and config.omega0 > 0:
        rb = blockade_radius(config.c6, config.omega0)
    else:
        rb = 0.0
    regime = classify_regime(config.spacing_r, rb) if rb > 0 else Regime.WEAK
    if config.c6 > 0:
        v0, v1, v2 = vdw_coefficients(config.c6, config.spacing_r, x_disp * 1e6)
    else:
        v0 = v1 = v2 = 0.0

    return DerivedParams(
        x0_g=x0_g,
        x0_r=x0_r,
        eta_g=eta_g,
        eta_r=eta_r,
        eta_gr=eta_gr,
        zeta=zeta,
        rabi_period_t=rabi_period,
        blockade_radius_rb=rb,
        v0=v0,
        v1=v1,
        v2=v2,
        regime=regime,
    )
