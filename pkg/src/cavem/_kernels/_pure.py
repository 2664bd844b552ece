"""Pure-numpy implementations of the hot spectral kernels.

These are the fallback twins of the compiled extension in ``_fast.pyx``;
both expose identical signatures and must agree to floating precision.
All rate/frequency arguments share one convention (the formulas are
homogeneous in rates), callers pass angular quantities.
"""

from __future__ import annotations

import numpy as np


def eit_reflection_grid(omega, omega_r, kappa_i, kappa_e, omega_m, gamma, g, fano_phase):
    """Complex reflection 1 - kappa_e*exp(i*phi) / (i*(omega_r-omega) + kappa/2 + g^2/(i*(omega_m-omega) + gamma/2))."""
    omega = np.asarray(omega, dtype=np.float64)
    kappa = kappa_i + kappa_e
    denom = 1j * (omega_r - omega) + 0.5 * kappa
    if g != 0.0:
        denom = denom + (g * g) / (1j * (omega_m - omega) + 0.5 * gamma)
    return 1.0 - kappa_e * np.exp(1j * fano_phase) / denom


def psd_quanta_grid(omega, omega_r, kappa_i, kappa_e, omega_m, gamma_i, g,
                    n_add, n_wg, n_b_r, n_b_m):
    """Output noise spectral density in quanta (before the hbar*omega*gain scale).

    n_add + 1/2 + waveguide, microwave-bath and mechanical-bath terms built
    from the bare susceptibilities chi_r, chi_m; includes noise squashing
    through the shared 1 + g^2 chi_m chi_r denominator.
    """
    omega = np.asarray(omega, dtype=np.float64)
    kappa = kappa_i + kappa_e
    chi_r = 1.0 / (0.5 * kappa - 1j * (omega - omega_r))
    out = np.full(omega.shape, n_add + 0.5, dtype=np.float64)
    if g != 0.0:
        chi_m = 1.0 / (0.5 * gamma_i - 1j * (omega - omega_m))
        dd = 1.0 + (g * g) * chi_m * chi_r
        abs_d2 = dd.real * dd.real + dd.imag * dd.imag
        abs_chi_r2 = chi_r.real * chi_r.real + chi_r.imag * chi_r.imag
        abs_chi_m2 = chi_m.real * chi_m.real + chi_m.imag * chi_m.imag
        if n_wg != 0.0:
            wg = 1.0 - kappa_e * chi_r / dd
            out += n_wg * (wg.real * wg.real + wg.imag * wg.imag)
        if n_b_r != 0.0:
            out += n_b_r * kappa_e * kappa_i * abs_chi_r2 / abs_d2
        if n_b_m != 0.0:
            out += n_b_m * kappa_e * gamma_i * g * g * abs_chi_r2 * abs_chi_m2 / abs_d2
    else:
        abs_chi_r2 = chi_r.real * chi_r.real + chi_r.imag * chi_r.imag
        if n_wg != 0.0:
            wg = 1.0 - kappa_e * chi_r
            out += n_wg * (wg.real * wg.real + wg.imag * wg.imag)
        if n_b_r != 0.0:
            out += n_b_r * kappa_e * kappa_i * abs_chi_r2
    return out


def lorentzian_grid(x, center, fwhm, height, offset):
    """height * (fwhm/2)^2 / ((x-center)^2 + (fwhm/2)^2) + offset."""
    x = np.asarray(x, dtype=np.float64)
    hw2 = (0.5 * fwhm) ** 2
    d = x - center
    return height * hw2 / (d * d + hw2) + offset


def exp_decay_grid(t, amplitude, rate, offset):
    """amplitude * exp(-rate * t) + offset."""
    t = np.asarray(t, dtype=np.float64)
    return amplitude * np.exp(-rate * t) + offset
