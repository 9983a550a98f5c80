# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels; semantics match `_fallback` exactly.

The hot loops are the per-step two-level conjugations of the resonant
drive stepper and the dense RK4 stages of the dissipative stepper.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

backend_name = "compiled"

ctypedef double complex cplx


def conjugate_drive_steps(cplx[:, ::1] rho, int a, int b, double phi,
                          double[::1] cos_half, double[::1] sin_half,
                          cplx[:, :, ::1] out):
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t nsteps = cos_half.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double c, s
    cdef cplx eab = -1j * (np.cos(phi) + 1j * np.sin(phi))
    cdef cplx eba = -1j * (np.cos(phi) - 1j * np.sin(phi))
    cdef cplx eab_c = eab.conjugate()
    cdef cplx eba_c = eba.conjugate()
    cdef cplx va, vb
    for j in range(nsteps):
        c = cos_half[j]
        s = sin_half[j]
        for k in range(n):
            va = rho[a, k]
            vb = rho[b, k]
            rho[a, k] = c * va + (eab * s) * vb
            rho[b, k] = (eba * s) * va + c * vb
        for k in range(n):
            va = rho[k, a]
            vb = rho[k, b]
            rho[k, a] = c * va + (eab_c * s) * vb
            rho[k, b] = (eba_c * s) * va + c * vb
        for i in range(n):
            for k in range(n):
                out[j, i, k] = rho[i, k]


def left_multiply_drive_steps(cplx[:, ::1] mat, int a, int b, double phi,
                              double[::1] cos_half, double[::1] sin_half):
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t nsteps = cos_half.shape[0]
    cdef Py_ssize_t j, k
    cdef double c, s
    cdef cplx eab = -1j * (np.cos(phi) + 1j * np.sin(phi))
    cdef cplx eba = -1j * (np.cos(phi) - 1j * np.sin(phi))
    cdef cplx va, vb
    for j in range(nsteps):
        c = cos_half[j]
        s = sin_half[j]
        for k in range(n):
            va = mat[a, k]
            vb = mat[b, k]
            mat[a, k] = c * va + (eab * s) * vb
            mat[b, k] = (eba * s) * va + c * vb


cdef void _rhs(cplx[:, ::1] rho, double amp, cplx[:, ::1] coupling,
               long[::1] src, long[::1] dst, double[::1] rates,
               cplx[:, ::1] scratch, cplx[:, ::1] out) nogil:
    # out = -i amp (C rho - rho C) + dissipator(rho); scratch holds C rho.
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t i, j, k, s_idx, d_idx
    cdef double g
    cdef cplx acc
    if amp != 0.0:
        for i in range(n):
            for j in range(n):
                acc = 0
                for k in range(n):
                    acc = acc + coupling[i, k] * rho[k, j]
                scratch[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0
                for k in range(n):
                    acc = acc + rho[i, k] * coupling[k, j]
                out[i, j] = -1j * amp * (scratch[i, j] - acc)
    else:
        for i in range(n):
            for j in range(n):
                out[i, j] = 0
    for k in range(src.shape[0]):
        s_idx = src[k]
        d_idx = dst[k]
        g = rates[k]
        out[d_idx, d_idx] = out[d_idx, d_idx] + g * rho[s_idx, s_idx]
        for j in range(n):
            out[s_idx, j] = out[s_idx, j] - 0.5 * g * rho[s_idx, j]
        for i in range(n):
            out[i, s_idx] = out[i, s_idx] - 0.5 * g * rho[i, s_idx]


def lindblad_rk4_steps(cplx[:, ::1] rho, cplx[:, ::1] coupling,
                       double[::1] amps, double h,
                       long[::1] src, long[::1] dst, double[::1] rates,
                       cplx[:, :, ::1] out):
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t nsteps = (amps.shape[0] - 1) // 2
    cdef Py_ssize_t i, j, step
    cdef double a0, a1, a2
    stage = np.empty((n, n), dtype=complex)
    k1 = np.empty((n, n), dtype=complex)
    k2 = np.empty((n, n), dtype=complex)
    k3 = np.empty((n, n), dtype=complex)
    k4 = np.empty((n, n), dtype=complex)
    scratch = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] stage_v = stage
    cdef cplx[:, ::1] k1_v = k1
    cdef cplx[:, ::1] k2_v = k2
    cdef cplx[:, ::1] k3_v = k3
    cdef cplx[:, ::1] k4_v = k4
    cdef cplx[:, ::1] scratch_v = scratch
    for step in range(nsteps):
        a0 = amps[2 * step]
        a1 = amps[2 * step + 1]
        a2 = amps[2 * step + 2]
        _rhs(rho, a0, coupling, src, dst, rates, scratch_v, k1_v)
        for i in range(n):
            for j in range(n):
                stage_v[i, j] = rho[i, j] + (0.5 * h) * k1_v[i, j]
        _rhs(stage_v, a1, coupling, src, dst, rates, scratch_v, k2_v)
        for i in range(n):
            for j in range(n):
                stage_v[i, j] = rho[i, j] + (0.5 * h) * k2_v[i, j]
        _rhs(stage_v, a1, coupling, src, dst, rates, scratch_v, k3_v)
        for i in range(n):
            for j in range(n):
                stage_v[i, j] = rho[i, j] + h * k3_v[i, j]
        _rhs(stage_v, a2, coupling, src, dst, rates, scratch_v, k4_v)
        for i in range(n):
            for j in range(n):
                rho[i, j] = rho[i, j] + (h / 6.0) * (
                    k1_v[i, j] + 2.0 * k2_v[i, j] + 2.0 * k3_v[i, j] + k4_v[i, j])
                out[step, i, j] = rho[i, j]
