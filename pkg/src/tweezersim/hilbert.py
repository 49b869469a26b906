"""Basis encoding and matrix-free state-vector algebra.

Atom j occupies two bits of the basis index: bit 2j is the internal state
(0 -> |g>, 1 -> |R>) and bit 2j+1 the motional state (0 -> |0>, 1 -> |1>).
Bit value 1 encodes the upper basis vector, so sigma^+ sigma^- is exactly the
motional number operator.  All operators act through bit tests and XOR flips
on index arrays; no operator matrix is materialised.
"""

from __future__ import annotations

import struct

import numpy as np

from .params import ParameterError

MAX_ATOMS = 31  # 4^n must stay below 2^63

CHECKPOINT_MAGIC = b"TWZS"
CHECKPOINT_VERSION = 1


class DimensionError(ValueError):
    """Raised when state-vector dimensions are inconsistent."""


def dimension(n_atoms: int) -> int:
    """Hilbert-space dimension 4^n_atoms."""
    if n_atoms < 1:
        raise ParameterError("n_atoms must be >= 1")
    if n_atoms > MAX_ATOMS:
        raise ParameterError(f"n_atoms > {MAX_ATOMS} overflows 64-bit basis indices")
    return 1 << (2 * n_atoms)


def n_atoms_of(psi: np.ndarray) -> int:
    dim = psi.shape[0]
    n = max(dim.bit_length() - 1, 0)
    if n % 2 or (1 << n) != dim:
        raise DimensionError(f"state length {dim} is not a power of four")
    return n // 2


def internal_bit(atom_j: int) -> int:
    return 2 * atom_j


def motional_bit(atom_j: int) -> int:
    return 2 * atom_j + 1


def encode(states) -> int:
    """Index of the product state given per-atom (internal, motional) pairs."""
    index = 0
    for j, (s, m) in enumerate(states):
        if s not in (0, 1) or m not in (0, 1):
            raise ParameterError("local states must be 0 or 1")
        index |= s << internal_bit(j)
        index |= m << motional_bit(j)
    return index


def decode(index: int, n_atoms: int) -> list[tuple[int, int]]:
    """Per-atom (internal, motional) pairs of a basis index."""
    if not 0 <= index < dimension(n_atoms):
        raise ParameterError("basis index out of range")
    return [((index >> internal_bit(j)) & 1, (index >> motional_bit(j)) & 1) for j in range(n_atoms)]


def initial_state(n_atoms: int) -> np.ndarray:
    """All atoms in |g,0>: unit amplitude on basis index 0."""
    psi = np.zeros(dimension(n_atoms), dtype=np.complex128)
    psi[0] = 1.0
    return psi


def inner(psi: np.ndarray, phi: np.ndarray) -> complex:
    if psi.shape != phi.shape:
        raise DimensionError("inner product needs equal dimensions")
    return complex(np.vdot(psi, phi))


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(psi))


# Single-bit operators decomposed into canonical rows.  Each entry is a tuple
# of (required_row_bit, flips_bit, coefficient): the operator contributes
# coefficient * psi[col] to out[row] where row has the required bit value and
# col = row ^ bit if flips_bit else row.
_CANONICAL_OPS = {
    "proj0": ((0, False, 1.0),),
    "proj1": ((1, False, 1.0),),
    "z": ((1, False, 1.0), (0, False, -1.0)),
    "+": ((1, True, 1.0),),
    "-": ((0, True, 1.0),),
    "x": ((1, True, 1.0), (0, True, 1.0)),
    "y": ((1, True, -1.0j), (0, True, 1.0j)),
}

# proj_g / proj_R imply the internal bit, proj_n0 / proj_n1 the motional bit.
_OP_ALIASES = {
    "proj_g": ("proj0", "internal"),
    "proj_R": ("proj1", "internal"),
    "proj_n0": ("proj0", "motional"),
    "proj_n1": ("proj1", "motional"),
}


def _resolve_op(op: str, which: str) -> tuple[tuple, int]:
    """Map an op name + subspace to canonical rows and a bit-position kind."""
    if op in _OP_ALIASES:
        op, which = _OP_ALIASES[op]
    if op not in _CANONICAL_OPS:
        raise ParameterError(f"unknown operator {op!r}")
    if which not in ("internal", "motional"):
        raise ParameterError(f"unknown subspace {which!r}")
    return _CANONICAL_OPS[op], which


def _bitpos(atom_j: int, which: str, n_atoms: int) -> int:
    if not 0 <= atom_j < n_atoms:
        raise ParameterError(f"atom index {atom_j} out of range for {n_atoms} atoms")
    return internal_bit(atom_j) if which == "internal" else motional_bit(atom_j)


def apply_site_op(psi, atom_j, which, op, coeff=1.0, out=None):
    """Accumulate coeff * (O_j psi) into out, matrix-free.

    O is a 2x2 operator from {x, y, z, +, -, proj_g, proj_R, proj_n0, proj_n1}
    acting on the chosen bit of atom_j, identity elsewhere.
    """
    n = n_atoms_of(psi)
    rows, which = _resolve_op(op, which)
    pos = _bitpos(atom_j, which, n)
    if out is None:
        out = np.zeros_like(psi)
    idx = np.arange(psi.shape[0], dtype=np.int64)
    bit = (idx >> pos) & 1
    mask = np.int64(1) << pos
    for req, flips, c in rows:
        sel = bit == req
        src = idx[sel] ^ mask if flips else idx[sel]
        out[idx[sel]] += (coeff * c) * psi[src]
    return out


def apply_two_site_op(
    psi,
    atom_i,
    atom_j,
    op_i,
    op_j,
    coeff=1.0,
    which_i="motional",
    which_j="motional",
    out=None,
):
    """Accumulate coeff * (O_i O_j psi) into out for two distinct atoms.

    proj_g/proj_R/proj_n0/proj_n1 pin their own subspace; bare Pauli names use
    which_i / which_j (motional by default, matching the hopping terms).
    """
    if atom_i == atom_j:
        raise ParameterError("two-site operator needs distinct atoms")
    n = n_atoms_of(psi)
    rows_i, which_i = _resolve_op(op_i, which_i)
    rows_j, which_j = _resolve_op(op_j, which_j)
    pos_i = _bitpos(atom_i, which_i, n)
    pos_j = _bitpos(atom_j, which_j, n)
    if pos_i == pos_j:
        raise ParameterError("two-site operator bits must differ")
    if out is None:
        out = np.zeros_like(psi)
    idx = np.arange(psi.shape[0], dtype=np.int64)
    bit_i = (idx >> pos_i) & 1
    bit_j = (idx >> pos_j) & 1
    for req_i, flips_i, c_i in rows_i:
        for req_j, flips_j, c_j in rows_j:
            sel = (bit_i == req_i) & (bit_j == req_j)
            flip = (np.int64(1 << pos_i) if flips_i else 0) | (np.int64(1 << pos_j) if flips_j else 0)
            src = idx[sel] ^ flip
            out[idx[sel]] += (coeff * c_i * c_j) * psi[src]
    return out


def save_checkpoint(path, psi: np.ndarray, n_atoms: int) -> None:
    """Binary amplitude checkpoint: magic, version, n_atoms (LE) + complex64 pairs."""
    if psi.shape[0] != dimension(n_atoms):
        raise DimensionError("state length does not match n_atoms")
    header = struct.pack("<4sII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, n_atoms)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(psi, dtype="<c8").tobytes())


def load_checkpoint(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) != 12:
            raise ParameterError("truncated checkpoint header")
        magic, version, n_atoms = struct.unpack("<4sII", header)
        if magic != CHECKPOINT_MAGIC:
            raise ParameterError("not a state checkpoint (bad magic)")
        if version != CHECKPOINT_VERSION:
            raise ParameterError(f"unsupported checkpoint version {version}")
        payload = fh.read()
    dim = dimension(n_atoms)
    amplitudes = np.frombuffer(payload, dtype="<c8")
    if amplitudes.shape[0] != dim:
        raise ParameterError("checkpoint payload length does not match n_atoms")
    return amplitudes.astype(np.complex128), n_atoms
