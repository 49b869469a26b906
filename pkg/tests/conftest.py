"""Shared test oracles: independent dense constructions and quadrature.

Everything here is built from the physics directly (explicit 2x2/4x4 numpy
matrices, Kronecker products, scipy quadrature) without touching the
package's matrix-free machinery, so package bugs cannot cancel out.
"""

import math
from functools import reduce

import numpy as np
import pytest
from scipy import integrate

# ---------------------------------------------------------------------------
# Single-bit operators, index order (|0>, |1>) with bit value 1 = upper state.
I2 = np.eye(2, dtype=complex)
PROJ0 = np.diag([1.0, 0.0]).astype(complex)
PROJ1 = np.diag([0.0, 1.0]).astype(complex)
SZ = np.diag([-1.0, 1.0]).astype(complex)
SP = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
SM = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SX = SP + SM
SY = -1j * (SP - SM)

DENSE_OPS = {
    "proj0": PROJ0,
    "proj1": PROJ1,
    "proj_g": PROJ0,
    "proj_R": PROJ1,
    "proj_n0": PROJ0,
    "proj_n1": PROJ1,
    "z": SZ,
    "+": SP,
    "-": SM,
    "x": SX,
    "y": SY,
}


def kron_bits(n_bits, placed):
    """Operator on an n_bits register; placed maps bit position -> 2x2 matrix.

    Bit 0 is the least significant index bit, matching the package encoding.
    """
    mats = [placed.get(p, I2) for p in range(n_bits)]
    return reduce(np.kron, reversed(mats))


def dense_site_op(n_atoms, atom, which, op):
    pos = 2 * atom + (0 if which == "internal" else 1)
    return kron_bits(2 * n_atoms, {pos: DENSE_OPS[op]})


def kron_atoms(n_atoms, placed):
    """Operator from per-atom 4x4 blocks (local basis |g0>,|R0>,|g1>,|R1>)."""
    mats = [placed.get(j, np.eye(4, dtype=complex)) for j in range(n_atoms)]
    return reduce(np.kron, reversed(mats))


def local4(op_mot, op_int):
    """4x4 local block = motional (x) internal, internal in the low bit."""
    return np.kron(op_mot, op_int)


def dense_hamiltonian(config, derived, omega):
    """Independent dense H for a given drive value omega (rad/s)."""
    n = config.n_atoms
    damp = math.exp(-0.5 * derived.eta_gr**2)
    z3 = derived.zeta**3
    rabi = np.zeros((4, 4), dtype=complex)
    rabi[1, 0] = derived.zeta * damp
    rabi[3, 2] = (1.0 - derived.eta_gr**2) * z3 * damp
    rabi[3, 0] = 1j * derived.eta_g * z3 * damp
    rabi[1, 2] = 1j * derived.eta_r * z3 * damp
    rabi = 0.5 * (rabi + rabi.conj().T)

    trap = np.diag([0.0, 0.0, config.omega_trap_g, config.omega_trap_r]).astype(complex)
    proj_rr = local4(I2, PROJ1)
    sx_mot = local4(SX, I2)
    sp_mot = local4(SP, I2)
    sm_mot = local4(SM, I2)

    dim = 4**n
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        h += omega * kron_atoms(n, {j: rabi})
        h += kron_atoms(n, {j: trap})
    pairs = [(j, j + 1) for j in range(n - 1)]
    if config.boundary == "periodic" and n > 2:
        pairs.append((n - 1, 0))
    for i, j in pairs:
        pp = kron_atoms(n, {i: proj_rr, j: proj_rr})
        h += derived.v0 * pp
        h += derived.v1 * pp @ (kron_atoms(n, {i: sx_mot}) - kron_atoms(n, {j: sx_mot}))
        h += 0.5 * derived.v2 * pp @ (
            kron_atoms(n, {i: sp_mot, j: sm_mot}) + kron_atoms(n, {i: sm_mot, j: sp_mot})
        )
    return h


# ---------------------------------------------------------------------------
# Quadrature oracle for the recoil overlap integrals.

def _hermite_wf(m, x, x0):
    base = np.exp(-(x**2) / (2.0 * x0**2)) / math.sqrt(math.sqrt(math.pi) * x0)
    if m == 0:
        return base
    if m == 1:
        return base * math.sqrt(2.0) * x / x0
    raise ValueError("only the two lowest levels are modelled")


def overlap_quad(m_upper, m_lower, x0_upper, x0_lower, k):
    """<upper, m'| e^{ikx} |lower, m> by adaptive quadrature."""
    span = 12.0 * max(x0_upper, x0_lower)

    def re(x):
        return _hermite_wf(m_upper, x, x0_upper) * math.cos(k * x) * _hermite_wf(m_lower, x, x0_lower)

    def im(x):
        return _hermite_wf(m_upper, x, x0_upper) * math.sin(k * x) * _hermite_wf(m_lower, x, x0_lower)

    re_val, _ = integrate.quad(re, -span, span, limit=400, epsabs=1e-13, epsrel=1e-12)
    im_val, _ = integrate.quad(im, -span, span, limit=400, epsabs=1e-13, epsrel=1e-12)
    return re_val + 1j * im_val


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_state(rng, dim):
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)
