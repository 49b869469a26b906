"""Hamiltonian terms of the driven, trapped, interacting chain.

Three physical pieces, kept as symbolic term lists and compiled once per run
into flip-mask/coefficient arrays for the matrix-free kernels:

    * drive    - per-atom internal flip with carrier and sideband channels,
                 scaled by Omega(t) at application time;
    * trap     - state-specific motional number term;
    * pair vdW - nearest-neighbour Rydberg-Rydberg potential expanded to
                 second order in the trap displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from ._kernels import apply_masks
from .params import DerivedParams, ParameterError, SystemConfig, derive, drive_omega

DENSE_MAX_ATOMS = 4


@dataclass(frozen=True)
class Term:
    """Scalar coefficient times a product of single-bit operators."""

    coeff: complex
    ops: tuple  # ((atom, which, opname), ...) on distinct bits


@dataclass
class HamiltonianTerms:
    """Static (trap + interaction) and unit-drive (Rabi) term lists."""

    n_atoms: int
    static_terms: list
    rabi_terms: list
    _compiled: "CompiledHamiltonian | None" = field(default=None, repr=False)

    def compiled(self) -> "CompiledHamiltonian":
        if self._compiled is None:
            self._compiled = compile_terms(self)
        return self._compiled


@dataclass
class CompiledHamiltonian:
    """Mask/coefficient form consumed by the numba kernels."""

    n_atoms: int
    dim: int
    diag: np.ndarray  # complex128[dim]
    s_masks: np.ndarray  # int64[ms]
    s_coef: np.ndarray  # complex128[dim, ms]
    r_masks: np.ndarray  # int64[mr]
    r_coef: np.ndarray  # complex128[dim, mr]


def build_rabi_term(config: SystemConfig, derived: DerivedParams) -> list[Term]:
    """Unit-drive internal-flip terms; Omega(t) multiplies them at apply time.

    Per atom the |g,m> <-> |R,m'> block carries (with the overall 1/2):
    carrier zeta*e^(-eta_gr^2/2), both-excited (1-eta_gr^2)*zeta^3*e^(...),
    and the two imaginary sidebands eta_g/eta_r * zeta^3 * e^(...), plus
    Hermitian conjugates.
    """
    damp = math.exp(-0.5 * derived.eta_gr**2)
    zeta3 = derived.zeta**3
    a = derived.zeta * damp  # <R,0| . |g,0>
    b = (1.0 - derived.eta_gr**2) * zeta3 * damp  # <R,1| . |g,1>
    cg = derived.eta_g * zeta3 * damp  # <R,1| . |g,0>
    cr = derived.eta_r * zeta3 * damp  # <R,0| . |g,1>

    terms = []
    for j in range(config.n_atoms):
        tau_p = (j, "internal", "+")
        tau_m = (j, "internal", "-")
        terms.append(Term(0.5 * a, (tau_p, (j, "motional", "proj_n0"))))
        terms.append(Term(0.5 * b, (tau_p, (j, "motional", "proj_n1"))))
        terms.append(Term(0.5j * cg, (tau_p, (j, "motional", "+"))))
        terms.append(Term(0.5j * cr, (tau_p, (j, "motional", "-"))))
        terms.append(Term(0.5 * a, (tau_m, (j, "motional", "proj_n0"))))
        terms.append(Term(0.5 * b, (tau_m, (j, "motional", "proj_n1"))))
        terms.append(Term(-0.5j * cg, (tau_m, (j, "motional", "-"))))
        terms.append(Term(-0.5j * cr, (tau_m, (j, "motional", "+"))))
    return terms


def build_trap_term(config: SystemConfig) -> list[Term]:
    """State-specific trap: omega_g |g><g| n + omega_R |R><R| n per atom."""
    terms = []
    for j in range(config.n_atoms):
        n_op = (j, "motional", "proj_n1")
        terms.append(Term(config.omega_trap_g, ((j, "internal", "proj_g"), n_op)))
        terms.append(Term(config.omega_trap_r, ((j, "internal", "proj_R"), n_op)))
    return terms


def _nn_pairs(config: SystemConfig) -> list[tuple[int, int]]:
    """Single-counted nearest-neighbour bonds, oriented along the chain.

    The wrap-around bond of a ring is (n-1, 0): the staggered displacement
    term is orientation-sensitive and only the cyclic orientation keeps a
    uniform ring translation invariant.
    """
    n = config.n_atoms
    pairs = [(j, j + 1) for j in range(n - 1)]
    if config.boundary == "periodic" and n > 2:
        pairs.append((n - 1, 0))
    return pairs


def build_interaction_term(config: SystemConfig, derived: DerivedParams) -> list[Term]:
    """Nearest-neighbour vdW terms under double-Rydberg projectors.

    Per pair (i, j): v0 + v1 (sigma_i^x - sigma_j^x) + v2/2 (hopping), all
    multiplied by |R><R|_i |R><R|_j.  Pairs are single-counted (i < j).
    """
    v0, v1, v2 = derived.v0, derived.v1, derived.v2
    terms = []
    for i, j in _nn_pairs(config):
        proj = ((i, "internal", "proj_R"), (j, "internal", "proj_R"))
        terms.append(Term(v0, proj))
        terms.append(Term(v1, proj + ((i, "motional", "x"),)))
        terms.append(Term(-v1, proj + ((j, "motional", "x"),)))
        terms.append(Term(0.5 * v2, proj + ((i, "motional", "+"), (j, "motional", "-"))))
        terms.append(Term(0.5 * v2, proj + ((i, "motional", "-"), (j, "motional", "+"))))
    return terms


def build_hamiltonian(config: SystemConfig, derived: DerivedParams | None = None) -> HamiltonianTerms:
    if derived is None:
        derived = derive(config)
    static = build_trap_term(config) + build_interaction_term(config, derived)
    rabi = build_rabi_term(config, derived)
    return HamiltonianTerms(n_atoms=config.n_atoms, static_terms=static, rabi_terms=rabi)


def _canonical_rows(term: Term):
    """Expand a term into (coeff, flip_mask, cond_mask, cond_val) rows.

    Conditions are on the row (output) index bits; the column is
    row ^ flip_mask.
    """
    expansions = [(term.coeff, 0, 0, 0)]
    seen_bits = set()
    for atom, which, opname in term.ops:
        rows, which = hilbert._resolve_op(opname, which)
        pos = hilbert.internal_bit(atom) if which == "internal" else hilbert.motional_bit(atom)
        if pos in seen_bits:
            raise ParameterError("term operators must act on distinct bits")
        seen_bits.add(pos)
        nxt = []
        for coeff, flip, cmask, cval in expansions:
            for req, flips, c in rows:
                nxt.append(
                    (
                        coeff * c,
                        flip | ((1 << pos) if flips else 0),
                        cmask | (1 << pos),
                        cval | (req << pos),
                    )
                )
        expansions = nxt
    return expansions


def compile_terms(terms: HamiltonianTerms) -> CompiledHamiltonian:
    """Group canonical rows by flip mask into dense coefficient columns.

    All-zero columns (e.g. sidebands in the decoupled limit) are dropped; the
    numerical action is unchanged and the hot loop shrinks.
    """
    dim = hilbert.dimension(terms.n_atoms)
    idx = np.arange(dim, dtype=np.int64)

    def accumulate(term_list):
        diag = np.zeros(dim, dtype=np.complex128)
        offdiag: dict[int, np.ndarray] = {}
        for term in term_list:
            for coeff, flip, cmask, cval in _canonical_rows(term):
                if coeff == 0:
                    continue
                sel = (idx & cmask) == cval
                if flip == 0:
                    diag[sel] += coeff
                else:
                    col = offdiag.setdefault(flip, np.zeros(dim, dtype=np.complex128))
                    col[sel] += coeff
        masks = sorted(m for m, col in offdiag.items() if np.any(col != 0))
        coef = np.empty((dim, len(masks)), dtype=np.complex128)
        for k, m in enumerate(masks):
            coef[:, k] = offdiag[m]
        return diag, np.asarray(masks, dtype=np.int64), coef

    diag_s, s_masks, s_coef = accumulate(terms.static_terms)
    diag_r, r_masks, r_coef = accumulate(terms.rabi_terms)
    if np.any(diag_r != 0):
        raise ParameterError("drive terms must be purely off-diagonal")
    return CompiledHamiltonian(
        n_atoms=terms.n_atoms,
        dim=dim,
        diag=diag_s,
        s_masks=s_masks,
        s_coef=s_coef,
        r_masks=r_masks,
        r_coef=r_coef,
    )


def apply_compiled(compiled: CompiledHamiltonian, psi: np.ndarray, omega: float, out=None) -> np.ndarray:
    if psi.shape[0] != compiled.dim:
        raise hilbert.DimensionError("state length does not match the Hamiltonian")
    if out is None:
        out = np.empty_like(psi)
    apply_masks(
        compiled.diag,
        compiled.s_masks,
        compiled.s_coef,
        compiled.r_masks,
        compiled.r_coef,
        omega,
        psi,
        out,
    )
    return out


def apply_hamiltonian(
    terms: HamiltonianTerms,
    psi: np.ndarray,
    t: float,
    config: SystemConfig,
    derived: DerivedParams | None = None,
) -> np.ndarray:
    """H(t) psi with the ramped drive, via the compiled matrix-free form."""
    if derived is None:
        derived = derive(config)
    return apply_compiled(terms.compiled(), psi, drive_omega(config, derived, t))


def energy_expectation(
    terms: HamiltonianTerms,
    psi: np.ndarray,
    t: float,
    config: SystemConfig,
    derived: DerivedParams | None = None,
) -> float:
    return float(np.vdot(psi, apply_hamiltonian(terms, psi, t, config, derived)).real)


def to_dense(
    terms: HamiltonianTerms,
    t: float,
    config: SystemConfig,
    derived: DerivedParams | None = None,
) -> np.ndarray:
    """Explicit matrix from the matrix-free action on every basis vector.

    Test oracle only; guarded to n_atoms <= 4.
    """
    if terms.n_atoms > DENSE_MAX_ATOMS:
        raise ParameterError(f"dense realisation is limited to n_atoms <= {DENSE_MAX_ATOMS}")
    if derived is None:
        derived = derive(config)
    dim = hilbert.dimension(terms.n_atoms)
    dense = np.empty((dim, dim), dtype=np.complex128)
    basis = np.zeros(dim, dtype=np.complex128)
    for col in range(dim):
        basis[:] = 0.0
        basis[col] = 1.0
        dense[:, col] = apply_hamiltonian(terms, basis, t, config, derived)
    return dense


def dump_dense_csv(path, terms: HamiltonianTerms, t: float, config: SystemConfig) -> int:
    """Write dense nonzeros as (row, col, re, im) CSV; returns the count."""
    dense = to_dense(terms, t, config)
    rows, cols = np.nonzero(dense)
    with open(path, "w", newline="") as fh:
        fh.write("row,col,re,im\n")
        for r, c in zip(rows, cols):
            val = dense[r, c]
            fh.write(f"{r},{c},{val.real:.17g},{val.imag:.17g}\n")
    return len(rows)
