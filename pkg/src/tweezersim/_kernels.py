"""Numba kernels for the matrix-free Hamiltonian action and RK4 stepping.

The compiled Hamiltonian is a diagonal vector plus one complex coefficient
column per distinct XOR flip mask:

    (H psi)[i] = diag[i] psi[i]
               + sum_k s_coef[i, k] psi[i ^ s_masks[k]]
               + omega(t) * sum_k r_coef[i, k] psi[i ^ r_masks[k]]

The kernels are single-threaded on purpose: at the dimensions the binding
acceptance suite runs (4^6), thread fork/join costs more than it saves, and
serial kernels keep results independent of thread count and safe under
fork-based sweep workers.  Concurrency lives at the run level instead.
"""

from numba import njit


@njit(cache=True)
def apply_masks(diag, s_masks, s_coef, r_masks, r_coef, omega, psi, out):
    dim = psi.shape[0]
    ns = s_masks.shape[0]
    nr = r_masks.shape[0]
    for i in range(dim):
        acc = diag[i] * psi[i]
        for k in range(ns):
            acc += s_coef[i, k] * psi[i ^ s_masks[k]]
        rab = 0.0j
        for k in range(nr):
            rab += r_coef[i, k] * psi[i ^ r_masks[k]]
        out[i] = acc + omega * rab


@njit(cache=True)
def rk4_step_kernel(diag, s_masks, s_coef, r_masks, r_coef, om1, om2, om3, dt, psi, h, acc, tmp):
    """One RK4 step of dpsi/dt = -i H(t) psi, in place on psi.

    om1, om2, om3 are Omega at t, t + dt/2, t + dt.  h, acc, tmp are
    caller-owned scratch vectors of the same length as psi.
    """
    dim = psi.shape[0]
    c_half = -0.5j * dt
    c_full = -1.0j * dt
    c_sixth = -1.0j * dt / 6.0

    apply_masks(diag, s_masks, s_coef, r_masks, r_coef, om1, psi, h)
    for i in range(dim):
        acc[i] = h[i]
        tmp[i] = psi[i] + c_half * h[i]
    apply_masks(diag, s_masks, s_coef, r_masks, r_coef, om2, tmp, h)
    for i in range(dim):
        acc[i] += 2.0 * h[i]
        tmp[i] = psi[i] + c_half * h[i]
    apply_masks(diag, s_masks, s_coef, r_masks, r_coef, om2, tmp, h)
    for i in range(dim):
        acc[i] += 2.0 * h[i]
        tmp[i] = psi[i] + c_full * h[i]
    apply_masks(diag, s_masks, s_coef, r_masks, r_coef, om3, tmp, h)
    for i in range(dim):
        psi[i] = psi[i] + c_sixth * (acc[i] + h[i])
