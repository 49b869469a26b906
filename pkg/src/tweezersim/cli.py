"""Command-line entry point: single runs, sweeps, re-analysis, self-test.

Units at this boundary follow the figure axes: frequencies in plain kHz
(the 2*pi is applied internally), lengths in micrometres, times in units of
the drive period T.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 self-test failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, spectral
from .evolve import NumericalError, TrajectoryRecord, run
from .hamiltonian import build_hamiltonian, dump_dense_csv, to_dense
from .params import PARAM_DOCS, ParameterError, SystemConfig, derive
from .sweep import (
    RUN_FILES,
    SweepSpec,
    execute_sweep,
    load_manifest,
    perform_run,
    run_hash,
    _write_manifest,
)

OUTPUT_ROOT_ENV = "TWEEZERSIM_OUT"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


def _config_key_epilog() -> str:
    lines = ["config keys (JSON; flags of the same name override the file):"]
    for key, doc in PARAM_DOCS.items():
        lines.append(f"  {key:<20s} {doc}")
    return "\n".join(lines)


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("config overrides")
    g.add_argument("--n-atoms", type=int, dest="n_atoms")
    g.add_argument("--spacing-r", type=float, dest="spacing_r", help="tweezer spacing [um]")
    g.add_argument("--r-over-rb", type=float, dest="r_over_rb", help="spacing in blockade radii")
    g.add_argument("--c6", type=float, dest="c6", help="vdW coefficient [MHz um^6]")
    g.add_argument("--omega0", type=float, dest="omega0", help="peak Rabi frequency [kHz]")
    g.add_argument(
        "--ramp-rate-r", type=float, dest="ramp_rate_r",
        help="ramp rate [kHz]; use --no-ramp for constant drive",
    )
    g.add_argument("--no-ramp", action="store_true", help="disable the ramp (constant drive)")
    g.add_argument("--omega-trap-g", type=float, dest="omega_trap_g", help="g trap [kHz]")
    g.add_argument("--omega-trap-r", type=float, dest="omega_trap_r", help="R trap [kHz]")
    g.add_argument("--laser-wavevector-k", type=float, dest="laser_wavevector_k", help="[1/m]")
    g.add_argument("--eta-g", type=float, dest="eta_g")
    g.add_argument("--eta-r", type=float, dest="eta_r")
    g.add_argument("--dt-over-t", type=float, dest="dt_over_t")
    g.add_argument("--t-final-over-t", type=float, dest="t_final_over_t")
    g.add_argument(
        "--window", type=float, nargs=2, metavar=("LO", "HI"), dest="steady_window",
        help="steady window [units of T]",
    )
    g.add_argument("--boundary", choices=("open", "periodic"), dest="boundary")
    g.add_argument("--record-stride", type=int, dest="record_stride")


def _collect_overrides(args) -> dict:
    overrides = {}
    for key in PARAM_DOCS:
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "no_ramp", False):
        overrides["ramp_rate_r"] = None
    if "steady_window" in overrides:
        overrides["steady_window"] = list(overrides["steady_window"])
    return overrides


def _load_config(args) -> SystemConfig:
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ParameterError(f"config file not found: {path}")
        config = SystemConfig.from_json(path)
    else:
        config = SystemConfig.from_dict({})
    overrides = _collect_overrides(args)
    if overrides:
        config = config.override(**overrides)
    return config


def _output_root(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def cmd_run(args) -> int:
    config = _load_config(args)
    plan_overrides = {}
    if args.renormalize:
        plan_overrides["renormalize"] = True
    root = _output_root(args)
    run_dir = root / run_hash(config.to_user_dict())[:12]
    manifest = perform_run(
        config.to_user_dict(),
        run_dir,
        plan_overrides=plan_overrides or None,
        per_site=args.per_site,
        taper=args.taper,
    )
    if args.dump_hamiltonian:
        derived = derive(config)
        terms = build_hamiltonian(config, derived)
        # Dense dump at full drive; the ramp only rescales the off-diagonal part.
        t_peak = derived.rabi_period_t * (
            config.omega0 / config.ramp_rate_r if config.ramp_rate_r else 0.0
        )
        count = dump_dense_csv(run_dir / "hamiltonian_dense.csv", terms, t_peak, config)
        print(f"wrote {count} Hamiltonian nonzeros to {run_dir / 'hamiltonian_dense.csv'}")

    diag = manifest["diagnostics"]["spectral"]
    print(f"run {manifest['hash'][:12]} -> {run_dir}")
    print(f"phase: {manifest['phase']}")
    print(
        "dominant peak: "
        f"{diag.get('dominant_freq_khz', float('nan')):.4g} kHz "
        f"(drive {diag['drive_freq_khz']:.4g} kHz, resolution {diag['resolution_khz']:.4g} kHz)"
    )
    if "second_freq_khz" in diag:
        print(
            f"second peak: {diag['second_freq_khz']:.4g} kHz, amplitude ratio "
            f"{diag['peak_ratio']:.3g}, incommensurate: {diag.get('incommensurate')}"
        )
    print(f"motional raw spectral max: {diag['motional_raw_max']:.3e}")
    print(
        f"norm drift {manifest['diagnostics']['max_norm_drift']:.3e}, "
        f"energy drift {manifest['diagnostics']['energy_drift_rel']}"
    )
    for warning in manifest["warnings"]:
        print(f"warning: {warning}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_json(args.spec)
    manifests = execute_sweep(spec, _output_root(args), parallelism=args.threads)
    n_ok = sum(1 for m in manifests if m.get("status") == "ok")
    print(f"sweep complete: {n_ok}/{len(manifests)} runs ok -> {_output_root(args)}")
    for m in manifests:
        mark = "" if m.get("status") == "ok" else "  FAILED"
        print(f"  {m['hash'][:12]}  {m.get('phase', 'n/a')}{mark}")
    return EXIT_OK if n_ok == len(manifests) else EXIT_NUMERICAL


def _respectrum(run_dir: Path, window, taper):
    manifest = load_manifest(run_dir)
    config = SystemConfig.from_dict(manifest["config"])
    derived = derive(config)
    record = TrajectoryRecord.from_csv(run_dir / RUN_FILES["timeseries"])
    window = tuple(window) if window else tuple(manifest["config"]["steady_window"])
    spec_int = spectral.dft(record.tau_z, record.times, window, derived.rabi_period_t, taper=taper)
    spec_mot = spectral.dft(record.sigma_z, record.times, window, derived.rabi_period_t, taper=taper)
    return manifest, config, record, window, spec_int, spec_mot


def cmd_spectrum(args) -> int:
    run_dir = Path(args.run_dir)
    manifest, config, record, window, spec_int, spec_mot = _respectrum(
        run_dir, args.window, args.taper
    )
    spec_int.to_csv(run_dir / RUN_FILES["spectrum_internal"])
    spec_mot.to_csv(run_dir / RUN_FILES["spectrum_motional"])
    peaks = spectral.find_peaks(spec_int)
    label = spectral.classify(spec_int, spec_mot, peaks, config)
    manifest["diagnostics"]["spectral"] = label.diagnostics
    manifest["phase"] = label.label.value
    _write_manifest(run_dir / "manifest.json", manifest)
    print(
        f"recomputed spectra over [{window[0]}, {window[1]}) T; "
        f"resolution {spec_int.resolution_khz:.6g} kHz"
    )
    print(f"phase: {label.label.value}")
    return EXIT_OK


def cmd_classify(args) -> int:
    run_dir = Path(args.run_dir)
    manifest, config, record, window, spec_int, spec_mot = _respectrum(
        run_dir, args.window, args.taper
    )
    peaks = spectral.find_peaks(spec_int, significance=args.significance)
    label = spectral.classify(spec_int, spec_mot, peaks, config, epsilon_m=args.epsilon_m)
    manifest["diagnostics"]["spectral"] = label.diagnostics
    manifest["phase"] = label.label.value
    _write_manifest(run_dir / "manifest.json", manifest)
    print(f"phase: {label.label.value}")
    for key, val in sorted(label.diagnostics.items()):
        print(f"  {key}: {val}")
    return EXIT_OK


def _selftest_dense_oracle() -> list[tuple[str, bool, str]]:
    """Independent Kronecker construction vs the matrix-free action at n = 2."""
    results = []
    config = SystemConfig.from_dict(
        {
            "n_atoms": 2,
            "omega0": 10.0,
            "omega_trap_g": 10.0,
            "omega_trap_r": 7.0,
            "eta_g": 0.1,
            "eta_r": 0.12,
            "r_over_rb": 2.0,
        }
    )
    derived = derive(config)
    terms = build_hamiltonian(config, derived)

    damp = math.exp(-0.5 * derived.eta_gr**2)
    z3 = derived.zeta**3
    # Local 4x4 blocks in basis |g,0>, |R,0>, |g,1>, |R,1>.
    rabi = np.zeros((4, 4), dtype=complex)
    rabi[1, 0] = derived.zeta * damp
    rabi[3, 2] = (1 - derived.eta_gr**2) * z3 * damp
    rabi[3, 0] = 1j * derived.eta_g * z3 * damp
    rabi[1, 2] = 1j * derived.eta_r * z3 * damp
    rabi = 0.5 * (rabi + rabi.conj().T)
    trap = np.diag([0.0, 0.0, config.omega_trap_g, config.omega_trap_r]).astype(complex)
    proj_r = np.diag([0.0, 1.0, 0.0, 1.0]).astype(complex)
    sx = np.zeros((4, 4), dtype=complex)
    sx[2, 0] = sx[0, 2] = sx[3, 1] = sx[1, 3] = 1.0
    sp = np.zeros((4, 4), dtype=complex)
    sp[2, 0] = sp[3, 1] = 1.0

    def two(a, b):
        return np.kron(b, a)  # atom 0 owns the low bits

    ident = np.eye(4, dtype=complex)
    h_static = two(trap, ident) + two(ident, trap)
    pp = two(proj_r, proj_r)
    h_static += derived.v0 * pp
    h_static += derived.v1 * pp @ (two(sx, ident) - two(ident, sx))
    hop = two(sp, sp.conj().T) + two(sp.conj().T, sp)
    h_static += 0.5 * derived.v2 * pp @ hop
    h_rabi = two(rabi, ident) + two(ident, rabi)

    rng = np.random.default_rng(7)
    t_unit = derived.rabi_period_t
    worst = 0.0
    for t in rng.uniform(0.0, 20.0, size=20) * t_unit:
        omega = min(config.ramp_rate_r * t / t_unit, config.omega0)
        dense_ref = h_static + omega * h_rabi
        dense = to_dense(terms, t, config, derived)
        worst = max(worst, float(np.max(np.abs(dense - dense_ref))))
    scale = max(config.omega0, 1.0)
    results.append(
        ("dense Kronecker oracle, n=2, 20 random times", worst / scale < 1e-12,
         f"max |dH|/Omega0 = {worst / scale:.3e}")
    )

    herm = float(np.max(np.abs(dense - dense.conj().T)))
    results.append(("Hermiticity of assembled H(t)", herm / scale < 1e-12, f"{herm / scale:.3e}"))
    return results


def _selftest_franck_condon() -> list[tuple[str, bool, str]]:
    """Gauss-Hermite quadrature of the recoil overlap vs the closed forms."""
    from .params import DEFAULT_CONSTANTS, derive_franck_condon, derive_oscillator_length

    nodes, weights = np.polynomial.hermite.hermgauss(160)
    results = []
    worst = 0.0
    for omega_g_khz in (0.5, 2.0, 10.0):
        for omega_r_khz in (1.0, 5.0, 20.0):
            x0g = derive_oscillator_length(DEFAULT_CONSTANTS.atomic_mass, omega_g_khz * 2e3 * math.pi)
            x0r = derive_oscillator_length(DEFAULT_CONSTANTS.atomic_mass, omega_r_khz * 2e3 * math.pi)
            k = 0.15 * math.sqrt(2.0) / x0r
            zeta, eta_gr = derive_franck_condon(x0g, x0r, k)
            a = 0.5 * (1.0 / x0g**2 + 1.0 / x0r**2)
            x = nodes / math.sqrt(a)
            base = weights / math.sqrt(a) / math.sqrt(math.pi * x0g * x0r)
            overlap = np.sum(base * np.exp(1j * k * x))
            ref = zeta * math.exp(-0.5 * eta_gr**2)
            worst = max(worst, abs(abs(overlap) - ref) / ref)
    results.append(
        ("carrier Franck-Condon factor vs quadrature", worst < 1e-8, f"max rel err {worst:.3e}")
    )
    return results


def _selftest_rabi() -> list[tuple[str, bool, str]]:
    """Constant-drive single-atom density against the resonant closed form."""
    config = SystemConfig.from_dict(
        {
            "n_atoms": 1,
            "omega0": 10.0,
            "ramp_rate_r": None,
            "omega_trap_g": 10.0,
            "omega_trap_r": 10.0,
            "eta_g": 0.0,
            "eta_r": 0.0,
            "t_final_over_t": 10.0,
            "steady_window": [5.0, 10.0],
        }
    )
    record = run(config)
    derived = derive(config)
    omega_eff = config.omega0 * derived.zeta * math.exp(-0.5 * derived.eta_gr**2)
    expected = -np.cos(omega_eff * record.times * derived.rabi_period_t)
    err = float(np.max(np.abs(record.tau_z - expected)))
    return [
        ("single-atom resonant Rabi closed form, 10 periods", err < 1e-8, f"max dev {err:.3e}"),
        (
            "norm conservation over 10 periods",
            record.max_norm_drift < 1e-8,
            f"drift {record.max_norm_drift:.3e}",
        ),
    ]


def cmd_selftest(_args) -> int:
    checks = []
    checks.extend(_selftest_franck_condon())
    checks.extend(_selftest_dense_oracle())
    checks.extend(_selftest_rabi())
    failed = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}  [{detail}]")
        failed += 0 if ok else 1
    if failed:
        print(f"{failed}/{len(checks)} self-test properties failed")
        return EXIT_SELFTEST
    print(f"all {len(checks)} self-test properties passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweezersim",
        description="Spin-motion dynamics of driven Rydberg chains in optical tweezers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run",
        help="execute one trajectory and write a run directory",
        epilog=_config_key_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_run.add_argument("--config", help="JSON config file (see config keys below)")
    p_run.add_argument("--out", help=f"output root (default ${OUTPUT_ROOT_ENV} or ./runs)")
    p_run.add_argument("--per-site", action="store_true", help="also write per_site.csv")
    p_run.add_argument("--renormalize", action="store_true", help="renormalise at record points")
    p_run.add_argument("--taper", choices=("hann",), help="spectral taper (default rectangular)")
    p_run.add_argument(
        "--dump-hamiltonian", action="store_true",
        help="write dense H nonzeros CSV (n_atoms <= 4)",
    )
    _add_override_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON (base/axes/linkage)")
    p_sweep.add_argument("--out", help="output root")
    p_sweep.add_argument("--threads", type=int, default=1, help="worker parallelism")
    p_sweep.set_defaults(func=cmd_sweep)

    p_spec = sub.add_parser("spectrum", help="recompute spectra of an existing run")
    p_spec.add_argument("--run-dir", required=True)
    p_spec.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p_spec.add_argument("--taper", choices=("hann",))
    p_spec.set_defaults(func=cmd_spectrum)

    p_cls = sub.add_parser("classify", help="re-classify an existing run")
    p_cls.add_argument("--run-dir", required=True)
    p_cls.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p_cls.add_argument("--taper", choices=("hann",))
    p_cls.add_argument("--significance", type=float, default=spectral.DEFAULT_SIGNIFICANCE)
    p_cls.add_argument("--epsilon-m", type=float, default=spectral.DEFAULT_MOTIONAL_EPSILON)
    p_cls.set_defaults(func=cmd_classify)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suites (n <= 3)")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
