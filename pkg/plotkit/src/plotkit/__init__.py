"""Publication-style figure regeneration for tweezer-chain run directories.

Consumes the documented CSV/JSON layout (timeseries, phase-space trajectory,
spectra, manifest) and renders time-series panels with broken axes, two-sided
spectra, and 3D phase-space montages.  No physics is recomputed here.
"""

__version__ = "0.1.0"

from .figures import closure_gap, plot_phase3d, plot_spectrum, plot_timeseries  # noqa: F401
from .io import RunData, RunDataError, load_run, ramp_profile  # noqa: F401
