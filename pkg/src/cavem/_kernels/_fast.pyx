# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot spectral kernels (see _pure.py for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

cnp.import_array()


def eit_reflection_grid(omega, double omega_r, double kappa_i, double kappa_e,
                        double omega_m, double gamma, double g, double fano_phase):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double kappa = kappa_i + kappa_e
    cdef double g2 = g * g
    cdef double ke_re = kappa_e * cos(fano_phase)
    cdef double ke_im = kappa_e * sin(fano_phase)
    cdef double dre, dim, mre, mim, m2, inv
    cdef Py_ssize_t i
    for i in range(n):
        dre = 0.5 * kappa
        dim = omega_r - w[i]
        if g2 != 0.0:
            mre = 0.5 * gamma
            mim = omega_m - w[i]
            m2 = mre * mre + mim * mim
            dre += g2 * mre / m2
            dim -= g2 * mim / m2
        inv = 1.0 / (dre * dre + dim * dim)
        # 1 - (ke_re + i*ke_im) * conj(d) * inv  with d = dre + i*dim
        out[i].real = 1.0 - (ke_re * dre + ke_im * dim) * inv
        out[i].imag = -(ke_im * dre - ke_re * dim) * inv
    return out


def psd_quanta_grid(omega, double omega_r, double kappa_i, double kappa_e,
                    double omega_m, double gamma_i, double g,
                    double n_add, double n_wg, double n_b_r, double n_b_m):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double kappa = kappa_i + kappa_e
    cdef double g2 = g * g
    cdef double floor = n_add + 0.5
    cdef double rre, rim, r2, mre, mim, m2, cr_re, cr_im, cm_re, cm_im
    cdef double d_re, d_im, d2, wg_re, wg_im, val, chir2, chim2
    cdef Py_ssize_t i
    for i in range(n):
        # chi_r = 1 / (kappa/2 - i*(w - omega_r))
        rre = 0.5 * kappa
        rim = -(w[i] - omega_r)
        r2 = rre * rre + rim * rim
        cr_re = rre / r2
        cr_im = -rim / r2
        chir2 = 1.0 / r2
        val = floor
        if g2 != 0.0:
            mre = 0.5 * gamma_i
            mim = -(w[i] - omega_m)
            m2 = mre * mre + mim * mim
            cm_re = mre / m2
            cm_im = -mim / m2
            chim2 = 1.0 / m2
            d_re = 1.0 + g2 * (cm_re * cr_re - cm_im * cr_im)
            d_im = g2 * (cm_re * cr_im + cm_im * cr_re)
            d2 = d_re * d_re + d_im * d_im
            if n_wg != 0.0:
                # 1 - kappa_e * chi_r / d
                wg_re = 1.0 - kappa_e * (cr_re * d_re + cr_im * d_im) / d2
                wg_im = -kappa_e * (cr_im * d_re - cr_re * d_im) / d2
                val += n_wg * (wg_re * wg_re + wg_im * wg_im)
            if n_b_r != 0.0:
                val += n_b_r * kappa_e * kappa_i * chir2 / d2
            if n_b_m != 0.0:
                val += n_b_m * kappa_e * gamma_i * g2 * chir2 * chim2 / d2
        else:
            if n_wg != 0.0:
                wg_re = 1.0 - kappa_e * cr_re
                wg_im = -kappa_e * cr_im
                val += n_wg * (wg_re * wg_re + wg_im * wg_im)
            if n_b_r != 0.0:
                val += n_b_r * kappa_e * kappa_i * chir2
        out[i] = val
    return out


def lorentzian_grid(x, double center, double fwhm, double height, double offset):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double hw2 = 0.25 * fwhm * fwhm
    cdef double d
    cdef Py_ssize_t i
    for i in range(n):
        d = xx[i] - center
        out[i] = height * hw2 / (d * d + hw2) + offset
    return out


def exp_decay_grid(t, double amplitude, double rate, double offset):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t n = tt.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = amplitude * exp(-rate * tt[i]) + offset
    return out
