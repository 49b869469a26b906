"""Normalised two-sided DFT of steady-state windows and phase classification.

Spectra are mean-removed and max-normalised; ``raw_max`` keeps the absolute
amplitude scale (|X_k| / N) that the motional-silence gate of the classifier
needs.  Frequencies are reported in kHz on the f = omega/2pi axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .params import ParameterError, SystemConfig

MIN_WINDOW_SAMPLES = 64
DEFAULT_SIGNIFICANCE = 0.05
DEFAULT_MOTIONAL_EPSILON = 1e-6
RATIO_MAX_DENOMINATOR = 8
RATIO_TOLERANCE = 1e-2
PEAK_MIN_SEPARATION_BINS = 2


class Phase(enum.Enum):
    RABI_OSCILLATION = "RabiOscillation"
    LIMIT_CYCLE = "LimitCycle"
    LIMIT_TORUS = "LimitTorus"
    UNCLASSIFIED = "Unclassified"


@dataclass
class SpectrumResult:
    """Two-sided, mean-removed, max-normalised DFT of one observable window."""

    freqs_khz: np.ndarray
    amps: np.ndarray
    raw_max: float
    window: tuple[float, float]
    resolution_khz: float
    n_samples: int
    mean_removed: bool = True
    tapered: bool = False

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("freq_khz,amp\n")
            for f, a in zip(self.freqs_khz, self.amps):
                fh.write(f"{f:.17g},{a:.17g}\n")

    @classmethod
    def from_csv(cls, path, window=(0.0, 0.0), raw_max=float("nan")) -> "SpectrumResult":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        freqs = data[:, 0]
        res = float(np.median(np.diff(freqs))) if len(freqs) > 1 else 0.0
        return cls(
            freqs_khz=freqs,
            amps=data[:, 1],
            raw_max=raw_max,
            window=tuple(window),
            resolution_khz=res,
            n_samples=len(freqs),
        )


@dataclass(frozen=True)
class Peak:
    freq_khz: float
    amp: float


@dataclass
class PeakList:
    """Significant f >= 0 peaks, descending amplitude."""

    peaks: list[Peak]
    significance: float

    def __len__(self):
        return len(self.peaks)

    def __getitem__(self, i):
        return self.peaks[i]


@dataclass
class PhaseLabel:
    label: Phase
    diagnostics: dict = field(default_factory=dict)


def select_window(times_over_t: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    """Indices of uniform samples with t in [lo, hi), robust to fp fuzz."""
    times = np.asarray(times_over_t, dtype=float)
    if times.size < 2:
        raise ParameterError("need at least two samples")
    steps = np.diff(times)
    dt = float(np.median(steps))
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ParameterError("non-uniform sampling in the analysis window")
    lo, hi = window
    sel = np.nonzero((times >= lo - 0.5 * dt) & (times < hi - 0.5 * dt))[0]
    if sel.size < MIN_WINDOW_SAMPLES:
        raise ParameterError(
            f"window [{lo}, {hi}) holds {sel.size} samples; need >= {MIN_WINDOW_SAMPLES}"
        )
    return sel


def dft(
    series: np.ndarray,
    times_over_t: np.ndarray,
    window: tuple[float, float],
    rabi_period_s: float,
    taper: str | None = None,
) -> SpectrumResult:
    """Mean-removed two-sided DFT over a window, frequencies in kHz.

    The window is rectangular by default; taper="hann" applies a Hann window
    after mean removal.  For even sample counts the unpaired Nyquist bin is
    dropped so the frequency axis is symmetric about zero.
    """
    series = np.asarray(series, dtype=float)
    times = np.asarray(times_over_t, dtype=float)
    if series.shape != times.shape:
        raise ParameterError("series and times must have equal length")
    sel = select_window(times, window)
    x = series[sel]
    n = x.size
    dt_s = float(np.median(np.diff(times[sel]))) * rabi_period_s

    x = x - x.mean()
    if taper == "hann":
        x = x * np.hanning(n)
        tapered = True
    elif taper in (None, "", "rect"):
        tapered = False
    else:
        raise ParameterError(f"unknown taper {taper!r}")

    spectrum = np.abs(np.fft.fft(x)) / n
    freqs_khz = np.fft.fftfreq(n, d=dt_s) * 1e-3
    spectrum = np.fft.fftshift(spectrum)
    freqs_khz = np.fft.fftshift(freqs_khz)
    if n % 2 == 0:
        spectrum = spectrum[1:]
        freqs_khz = freqs_khz[1:]

    raw_max = float(spectrum.max()) if spectrum.size else 0.0
    amps = spectrum / raw_max if raw_max > 0 else np.zeros_like(spectrum)
    return SpectrumResult(
        freqs_khz=freqs_khz,
        amps=amps,
        raw_max=raw_max,
        window=(float(window[0]), float(window[1])),
        resolution_khz=1e-3 / (n * dt_s),
        n_samples=n,
        tapered=tapered,
    )


def find_peaks(spectrum: SpectrumResult, significance: float = DEFAULT_SIGNIFICANCE) -> PeakList:
    """Strict local maxima of the f >= 0 half-spectrum above the floor.

    Peaks closer than PEAK_MIN_SEPARATION_BINS resolution bins to a stronger
    accepted peak are merged into it.
    """
    freqs = spectrum.freqs_khz
    amps = spectrum.amps
    candidates = [
        (amps[i], freqs[i])
        for i in range(1, len(amps) - 1)
        if freqs[i] >= 0
        and amps[i] > amps[i - 1]
        and amps[i] > amps[i + 1]
        and amps[i] >= significance
    ]
    candidates.sort(key=lambda p: (-p[0], p[1]))
    min_sep = PEAK_MIN_SEPARATION_BINS * spectrum.resolution_khz
    accepted: list[Peak] = []
    for amp, freq in candidates:
        if all(abs(freq - p.freq_khz) >= min_sep for p in accepted):
            accepted.append(Peak(freq_khz=float(freq), amp=float(amp)))
    return PeakList(peaks=accepted, significance=significance)


def commensurate_ratio(
    ratio: float,
    max_denominator: int = RATIO_MAX_DENOMINATOR,
    tolerance: float = RATIO_TOLERANCE,
) -> tuple[bool, Fraction | None]:
    """Best small rational p/q (q <= cap) and whether it matches the ratio.

    The ratio is folded into (0, 1]; a continued-fraction approximant within
    the tolerance marks the pair as frequency-locked.
    """
    if ratio <= 0 or not math.isfinite(ratio):
        raise ParameterError("frequency ratio must be positive and finite")
    rho = ratio if ratio <= 1 else 1.0 / ratio
    approx = Fraction(rho).limit_denominator(max_denominator)
    return abs(rho - float(approx)) <= tolerance, approx


def classify(
    spectrum_internal: SpectrumResult,
    spectrum_motional: SpectrumResult,
    peaks: PeakList,
    config: SystemConfig,
    epsilon_m: float = DEFAULT_MOTIONAL_EPSILON,
) -> PhaseLabel:
    """Dynamical-phase label from the steady-window spectra.

    RabiOscillation: motional spectrum silent (raw amplitude below epsilon_m,
    an absolute pre-normalisation test) and a single significant internal
    peak within one resolution bin of the drive frequency.  LimitCycle: one
    dominant peak (any second peak below 1/5 of it).  LimitTorus: two or more
    significant peaks with a frequency ratio no small rational reproduces.
    """
    if spectrum_internal.window != spectrum_motional.window:
        raise ParameterError("internal and motional spectra must share the steady window")
    res = spectrum_internal.resolution_khz
    drive_khz = config.omega0 / (2.0 * math.pi * 1e3)
    diag = {
        "n_significant_peaks": len(peaks),
        "significance": peaks.significance,
        "resolution_khz": res,
        "drive_freq_khz": drive_khz,
        "motional_raw_max": spectrum_motional.raw_max,
        "motional_epsilon": epsilon_m,
        "window": list(spectrum_internal.window),
    }
    if len(peaks) >= 1:
        diag["dominant_freq_khz"] = peaks[0].freq_khz
        diag["dominant_amp"] = peaks[0].amp
    if len(peaks) >= 2:
        diag["second_freq_khz"] = peaks[1].freq_khz
        diag["second_amp"] = peaks[1].amp
        diag["peak_ratio"] = peaks[1].amp / peaks[0].amp
        locked, approx = commensurate_ratio(peaks[1].freq_khz / peaks[0].freq_khz)
        diag["frequency_ratio"] = peaks[1].freq_khz / peaks[0].freq_khz
        diag["locked_rational"] = f"{approx.numerator}/{approx.denominator}" if locked else None
        diag["incommensurate"] = not locked

    motional_silent = spectrum_motional.raw_max < epsilon_m
    if (
        motional_silent
        and len(peaks) == 1
        and abs(peaks[0].freq_khz - drive_khz) <= res
    ):
        return PhaseLabel(Phase.RABI_OSCILLATION, diag)
    if len(peaks) >= 1 and (len(peaks) == 1 or peaks[1].amp < peaks[0].amp / 5.0):
        return PhaseLabel(Phase.LIMIT_CYCLE, diag)
    if len(peaks) >= 2 and diag.get("incommensurate"):
        return PhaseLabel(Phase.LIMIT_TORUS, diag)
    return PhaseLabel(Phase.UNCLASSIFIED, diag)
