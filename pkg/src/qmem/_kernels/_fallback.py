"""Pure-Python (numpy) implementations of the propagation kernels.

Semantics are shared with the compiled twin in `_core.pyx`:

* `conjugate_drive_steps`: midpoint-exponential stepping of a single
  resonant drive. Each step applies E = exp(-i h H(t_mid)) by conjugation,
  where H = A(t) d (e^{i phi}|a><b| + e^{-i phi}|b><a|) acts on one level
  pair, so E has a closed two-level form and each step is O(n).
* `left_multiply_drive_steps`: the same steps accumulated onto an operator
  (used to extract the realized unitary by propagating a basis of states).
* `lindblad_rk4_steps`: classical fixed-step 4th-order integration of
  drho/dt = -i[A(t) C, rho] + sum_c rate_c (L rho L^dag - {L^dag L, rho}/2)
  with L_c = |dst_c><src_c|.

The per-step half angles for the drive kernels are precomputed by the
caller as d * A(t_mid) * h and passed as cos/sin arrays.
"""

import numpy as np

backend_name = "fallback"


def conjugate_drive_steps(rho, a, b, phi, cos_half, sin_half, out):
    """Advance rho through len(cos_half) steps, recording each into out."""
    eab = -1j * np.exp(1j * phi)   # E[a, b] / sin
    eba = -1j * np.exp(-1j * phi)  # E[b, a] / sin
    for j in range(cos_half.shape[0]):
        c = cos_half[j]
        s = sin_half[j]
        row_a = rho[a, :].copy()
        row_b = rho[b, :].copy()
        rho[a, :] = c * row_a + (eab * s) * row_b
        rho[b, :] = (eba * s) * row_a + c * row_b
        col_a = rho[:, a].copy()
        col_b = rho[:, b].copy()
        rho[:, a] = c * col_a + (np.conj(eab) * s) * col_b
        rho[:, b] = (np.conj(eba) * s) * col_a + c * col_b
        out[j] = rho


def left_multiply_drive_steps(mat, a, b, phi, cos_half, sin_half):
    """mat <- E_k ... E_1 @ mat for the same step unitaries E_j."""
    eab = -1j * np.exp(1j * phi)
    eba = -1j * np.exp(-1j * phi)
    for j in range(cos_half.shape[0]):
        c = cos_half[j]
        s = sin_half[j]
        row_a = mat[a, :].copy()
        row_b = mat[b, :].copy()
        mat[a, :] = c * row_a + (eab * s) * row_b
        mat[b, :] = (eba * s) * row_a + c * row_b


def _rhs(rho, amp, coupling, src, dst, rates):
    if amp != 0.0:
        h_t = amp * coupling
        out = -1j * (h_t @ rho - rho @ h_t)
    else:
        out = np.zeros_like(rho)
    for k in range(src.shape[0]):
        s_idx = src[k]
        d_idx = dst[k]
        g = rates[k]
        out[d_idx, d_idx] += g * rho[s_idx, s_idx]
        out[s_idx, :] -= 0.5 * g * rho[s_idx, :]
        out[:, s_idx] -= 0.5 * g * rho[:, s_idx]
    return out


def lindblad_rk4_steps(rho, coupling, amps, h, src, dst, rates, out):
    """RK4-advance rho through (len(amps) - 1) // 2 steps, recording each."""
    nsteps = (amps.shape[0] - 1) // 2
    for j in range(nsteps):
        a0 = amps[2 * j]
        a1 = amps[2 * j + 1]
        a2 = amps[2 * j + 2]
        k1 = _rhs(rho, a0, coupling, src, dst, rates)
        k2 = _rhs(rho + (0.5 * h) * k1, a1, coupling, src, dst, rates)
        k3 = _rhs(rho + (0.5 * h) * k2, a1, coupling, src, dst, rates)
        k4 = _rhs(rho + h * k3, a2, coupling, src, dst, rates)
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j] = rho
