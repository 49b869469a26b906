"""Spin-motion dynamics of driven Rydberg atom chains in optical tweezers.

Each atom carries a two-level internal state and a two-level motional state;
the chain evolves under a ramped resonant drive with recoil (Lamb-Dicke)
coupling, state-specific trapping, and nearest-neighbour van der Waals
interactions.  Steady-state spectra classify the dynamics as Rabi
oscillation, limit cycle, or limit torus.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    DerivedParams,
    ParameterError,
    PhysicalConstants,
    Regime,
    SystemConfig,
    derive,
)
from .hilbert import dimension, initial_state  # noqa: F401
from .hamiltonian import HamiltonianTerms, apply_hamiltonian, build_hamiltonian  # noqa: F401
from .evolve import EvolutionPlan, TrajectoryRecord, run  # noqa: F401
from .observables import measure, phase_trajectory  # noqa: F401
from .spectral import Phase, PhaseLabel, SpectrumResult, classify, dft, find_peaks  # noqa: F401
from .sweep import SweepSpec, execute_sweep, expand_grid, perform_run  # noqa: F401
