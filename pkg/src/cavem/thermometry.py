"""Sideband thermometry: output-noise PSDs, mechanical emission, occupancy
extraction with noise-squashing correction, amplifier-line calibration and
driven-response decay separation.

PSDs are single-sided in detection frequency (spectrum-analyzer
convention).  Decay rates here are energy rates in 1/s (the angular
convention); detection frequency axes are cyclic Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import h, hbar, k as k_B

from . import _kernels
from .dynamics import TwoModeSystem, BathSpec
from .units import TWO_PI


@dataclass(frozen=True)
class AmplifierChain:
    """Detection chain: net gain (dB), added noise quanta, IF bandwidth (Hz)."""

    gain_db: float
    n_add: float
    nu_if: float

    def __post_init__(self) -> None:
        if self.n_add < 0:
            raise ValueError("n_add must be nonnegative")
        if self.nu_if <= 0:
            raise ValueError("nu_if must be positive")

    @property
    def gain_linear(self) -> float:
        return 10.0 ** (self.gain_db / 10.0)


@dataclass(frozen=True, eq=False)
class PSDTrace:
    """Sampled power spectral density: frequencies (Hz), psd (W/Hz), noise metadata."""

    frequencies: np.ndarray
    psd: np.ndarray
    rbw: float
    n_avg: float
    sigma: np.ndarray | None = None
    background_subtracted: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=float))
        object.__setattr__(self, "psd", np.asarray(self.psd, dtype=float))
        if self.frequencies.shape != self.psd.shape:
            raise ValueError("frequencies and psd must have the same shape")
        if not self.background_subtracted and np.any(self.psd < 0):
            raise ValueError("negative PSD values; set background_subtracted=True if intended")


@dataclass(frozen=True)
class DrivenResponseAreas:
    """Areas from the driven-response spectrum: coherent (delta-like),
    broadband-incoherent, and narrow-band-incoherent emission (W)."""

    S_delta: float
    S_bb: float
    S_nb: float

    def __post_init__(self) -> None:
        if min(self.S_delta, self.S_bb, self.S_nb) < 0:
            raise ValueError("areas must be nonnegative")


class MechanicalLine(NamedTuple):
    """Measured mechanical line from the driven-response step (angular rates)."""

    omega_center: float  # spring-shifted line center, rad/s
    gamma_total: float   # total measured linewidth, rad/s
    Gamma_em: float      # electromechanical readout rate, 1/s
    Gamma_i: float       # intrinsic energy decay rate, 1/s


class OccupancyResult(NamedTuple):
    n_tilde_m: float
    n_tilde_m_sigma: float
    n_b_m: float
    n_b_m_sigma: float
    n_b_r: float
    n_b_r_sigma: float


class DecayRates(NamedTuple):
    Gamma_d: float
    Gamma_i: float


def output_psd(system: TwoModeSystem, baths: BathSpec, chain: AmplifierChain, omega):
    """Amplified output PSD in W/Hz at angular detection frequency omega.

    S = hbar omega G_A [ n_add + 1/2 + waveguide + microwave-bath +
    mechanical-bath terms ]; the microwave-bath term carries the noise
    squashing dip at the mechanical frequency.
    """
    scalar = np.isscalar(omega)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    quanta = _kernels.psd_quanta_grid(
        w,
        system.mw.omega_r,
        system.mw.kappa_i,
        system.mw.kappa_e,
        system.mech.omega_m,
        system.mech.gamma_i_intrinsic_decay,
        system.g_angular,
        chain.n_add,
        baths.n_wg,
        baths.n_b_r,
        baths.n_b_m,
    )
    s = hbar * w * chain.gain_linear * quanta
    return float(s[0]) if scalar else s


def mech_emission(delta, n_tilde_m: float, kappa_e: float, kappa: float,
                  Gamma_em: float, gamma_total: float):
    """Mechanical-bath emission Lorentzian in quanta flux density.

    S_m(delta) = 4 n_tilde (kappa_e/kappa) (Gamma_em/gamma) *
    (gamma/2)^2 / (delta^2 + (gamma/2)^2), with gamma_total = gamma_i +
    Gamma_em supplied by the caller and n_tilde = n_b_m gamma_i / gamma.
    """
    if kappa <= 0 or gamma_total <= 0:
        raise ValueError("kappa and gamma_total must be positive")
    d = np.asarray(delta, dtype=float)
    hw2 = (0.5 * gamma_total) ** 2
    return 4.0 * n_tilde_m * (kappa_e / kappa) * (Gamma_em / gamma_total) * hw2 / (d * d + hw2)


def mech_emission_area(n_tilde_m: float, kappa_e: float, kappa: float, Gamma_em: float) -> float:
    """Closed-form area of mech_emission over detection frequency (Hz axis):

    integral S_m df = integral S_m d(delta)/2pi = n_tilde (kappa_e/kappa) Gamma_em,
    the Purcell-enhanced photon emission rate into the waveguide.
    """
    return n_tilde_m * (kappa_e / kappa) * Gamma_em


def bath_from_apparent(n_tilde_m: float, Gamma_em: float, Gamma_i: float) -> float:
    """Intrinsic bath occupancy from the apparent one: n_b_m = n_tilde (Gamma_em + Gamma_i)/Gamma_i.

    Only the energy decay rate enters; jitter broadening of the measured
    line must not be used here.
    """
    if Gamma_i <= 0:
        raise ValueError("Gamma_i must be positive: occupancy undefined at zero intrinsic decay")
    return n_tilde_m * (Gamma_em + Gamma_i) / Gamma_i


def decay_from_driven_response(areas: DrivenResponseAreas, gamma_total: float,
                               Gamma_em: float) -> DecayRates:
    """Separate decay from jitter: gamma/Gamma_d = 1 + (S_bb/S_delta)(1 - S_nb/S_delta).

    Returns the total decay rate Gamma_d and the intrinsic rate
    Gamma_i = Gamma_d - Gamma_em; inconsistent areas (implying Gamma_i < 0)
    raise.
    """
    if areas.S_delta <= 0:
        raise ValueError("S_delta must be positive")
    if areas.S_nb > areas.S_delta:
        raise ValueError("S_nb exceeds S_delta")
    ratio = 1.0 + (areas.S_bb / areas.S_delta) * (1.0 - areas.S_nb / areas.S_delta)
    gamma_d = gamma_total / ratio
    gamma_i = gamma_d - Gamma_em
    if gamma_i < 0:
        raise ValueError("areas inconsistent: implied intrinsic decay is negative")
    return DecayRates(Gamma_d=gamma_d, Gamma_i=gamma_i)


def bose_einstein_correction(nu: float, T: float) -> float:
    """eta = (h nu / k_B T) / (exp(h nu / k_B T) - 1); -> 1 in the classical limit."""
    if T <= 0:
        return 0.0
    x = h * nu / (k_B * T)
    if x < 1e-12:
        return 1.0
    return x / np.expm1(x)


def hemt_temperature(chain: AmplifierChain, nu: float) -> float:
    """Added-noise temperature equivalent of chain.n_add at frequency nu."""
    return chain.n_add * h * nu / k_B


def johnson_power(T: float, nu: float, chain: AmplifierChain) -> float:
    """Detected Johnson-Nyquist power of a matched load at temperature T.

    P = nu_if k_B G_A (eta(T) T + T_HEMT), with the Bose-Einstein
    correction eta and the amplifier noise expressed as the temperature
    equivalent of chain.n_add.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    eta_t = bose_einstein_correction(nu, T) * T
    return chain.nu_if * k_B * chain.gain_linear * (eta_t + hemt_temperature(chain, nu))


class GainCalibration(NamedTuple):
    gain_db: float
    gain_db_sigma: float
    T_hemt: float
    T_hemt_sigma: float
    covariance: np.ndarray  # over (G_A linear, T_hemt)
    residual_norm: float


def calibrate_gain(temps, powers, nu: float, nu_if: float, sigma=None) -> GainCalibration:
    """Joint fit of net gain and HEMT temperature from P(T) of a matched load.

    The model P = nu_if k_B [alpha eta(T) T + beta] is linear in
    (alpha, beta) = (G_A, G_A T_HEMT); the fit is weighted linear least
    squares and the quoted uncertainties follow from the residual-scaled
    covariance.
    """
    temps = np.asarray(temps, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if temps.size < 3:
        raise ValueError("need at least 3 temperature points")
    eta_t = np.array([bose_einstein_correction(nu, t) * t for t in temps])
    y = powers / (nu_if * k_B)
    design = np.column_stack([eta_t, np.ones_like(eta_t)])
    w = np.ones_like(y) if sigma is None else 1.0 / (np.asarray(sigma, dtype=float) / (nu_if * k_B))
    aw = design * w[:, None]
    yw = y * w
    coef, *_ = np.linalg.lstsq(aw, yw, rcond=None)
    resid = yw - aw @ coef
    dof = max(y.size - 2, 1)
    s2 = float(resid @ resid) / dof
    cov_ab = s2 * np.linalg.inv(aw.T @ aw)
    alpha, beta = coef
    if alpha <= 0:
        raise ValueError("calibration fit produced a nonpositive gain")
    t_hemt = beta / alpha
    # transform cov(alpha, beta) -> cov(alpha, T_hemt)
    jac = np.array([[1.0, 0.0], [-beta / alpha**2, 1.0 / alpha]])
    cov = jac @ cov_ab @ jac.T
    gain_db = 10.0 * np.log10(alpha)
    gain_db_sigma = 10.0 / np.log(10.0) * np.sqrt(cov[0, 0]) / alpha
    return GainCalibration(
        gain_db=float(gain_db),
        gain_db_sigma=float(gain_db_sigma),
        T_hemt=float(t_hemt),
        T_hemt_sigma=float(np.sqrt(cov[1, 1])),
        covariance=cov,
        residual_norm=float(np.sqrt(resid @ resid)),
    )


def _bath_bases(omega, system: TwoModeSystem):
    """Unit-coefficient microwave-bath and mechanical-bath terms of the PSD.

    Evaluated from the full kernel so they carry the interference structure
    exactly: the squashing dip at the bare mechanical frequency and the
    scattered-noise peak at the spring-shifted line.
    """
    args = (
        np.asarray(omega, dtype=float),
        system.mw.omega_r,
        system.mw.kappa_i,
        system.mw.kappa_e,
        system.mech.omega_m,
        system.mech.gamma_i_intrinsic_decay,
        system.g_angular,
        0.0,  # n_add
    )
    b_br = _kernels.psd_quanta_grid(*args, 0.0, 1.0, 0.0) - 0.5
    b_bm = _kernels.psd_quanta_grid(*args, 0.0, 0.0, 1.0) - 0.5
    return b_br, b_bm


def _bare_cavity_lorentzian(omega, system: TwoModeSystem) -> np.ndarray:
    """Microwave-bath term with the mechanical interference ignored."""
    kappa = system.mw.kappa_total
    return (
        system.mw.kappa_e
        * system.mw.kappa_i
        / ((0.5 * kappa) ** 2 + (np.asarray(omega, dtype=float) - system.mw.omega_r) ** 2)
    )


def extract_occupancy(trace: PSDTrace, system: TwoModeSystem, chain: AmplifierChain,
                      line: MechanicalLine, *, window_halfwidth: float = 5.0,
                      squash_correction: bool = True,
                      n_b_r_prior: float | None = None) -> OccupancyResult:
    """Occupancies from a calibrated PSD trace.

    The trace is converted to quanta units; the flat floor and the
    microwave-bath term are fit on the off-line region (beyond a guard band
    around the mechanical line), the background-subtracted line is
    integrated over +-window_halfwidth*gamma, and the area is converted to
    occupancy with the unit-coefficient mechanical-bath term of the full
    PSD.  With squash_correction the microwave-bath term keeps its exact
    interference structure across the line (squashing dip at the bare
    mechanical frequency, scattered-noise peak at the shifted line); the
    naive variant treats it as structureless there and is biased whenever
    n_b_r > 0.  Low SNR widens the returned uncertainties; it is never an
    error.

    The window is set by the measured total linewidth, so jitter-broadened
    lines integrate to the same decay-rate-only area that the bath
    conversion assumes.  When the trace does not span enough of the cavity
    line to constrain n_b_r, pass n_b_r_prior (its uncertainty is then
    reported as nan).
    """
    omega = TWO_PI * trace.frequencies
    scale = hbar * omega * chain.gain_linear
    q = trace.psd / scale
    if trace.sigma is not None:
        sigma_q = np.asarray(trace.sigma, dtype=float) / scale
    else:
        sigma_q = None

    delta = omega - line.omega_center
    gamma = line.gamma_total
    window = np.abs(delta) <= window_halfwidth * gamma
    guard = np.abs(delta) <= 3.0 * window_halfwidth * gamma
    off = ~guard
    if window.sum() < 8 or off.sum() < 8:
        raise ValueError("trace does not resolve the mechanical line and its surroundings")

    if sigma_q is None:
        # robust scatter estimate from first differences of the off-line region
        diffs = np.diff(q[off])
        est = np.median(np.abs(diffs)) / (np.sqrt(2.0) * 0.6745)
        sigma_q = np.full_like(q, max(est, 1e-30))

    b_br, b_bm = _bath_bases(omega, system)
    if not squash_correction:
        b_br = _bare_cavity_lorentzian(omega, system)

    # off-line fit: flat floor + microwave-bath term (per unit n_b_r); a
    # nearly flat basis over the off region is degenerate with the floor
    identifiable = np.ptp(b_br[off]) > 0.05 * np.max(b_br[off])
    if identifiable:
        design = np.column_stack([np.ones(off.sum()), b_br[off]])
        w = 1.0 / sigma_q[off]
        aw = design * w[:, None]
        coef, *_ = np.linalg.lstsq(aw, q[off] * w, rcond=None)
        cov = np.linalg.inv(aw.T @ aw)
        c0, n_b_r = coef
        sigma_c0 = float(np.sqrt(cov[0, 0]))
        sigma_nbr = float(np.sqrt(cov[1, 1]))
        cov01 = float(cov[0, 1])
    else:
        if n_b_r_prior is None:
            raise ValueError(
                "trace too narrow to constrain n_b_r; pass n_b_r_prior from a wide-band measurement"
            )
        n_b_r = float(n_b_r_prior)
        w = 1.0 / sigma_q[off]
        c0 = float(np.average(q[off] - n_b_r * b_br[off], weights=w * w))
        sigma_c0 = float(1.0 / np.sqrt(np.sum(w * w)))
        sigma_nbr = float("nan")
        cov01 = 0.0

    # integrate the background-subtracted line over the window; the unit
    # basis integrates on the same grid so discretization errors cancel
    f_win = trace.frequencies[window]
    q_line = q[window] - c0 - n_b_r * b_br[window]
    area = float(np.trapezoid(q_line, f_win))
    area_bm_unit = float(np.trapezoid(b_bm[window], f_win))

    n_b_m = area / area_bm_unit

    # uncertainty: window bins + background-subtraction terms
    weights = np.gradient(f_win)
    var_area = float(np.sum((weights * sigma_q[window]) ** 2))
    width = float(f_win[-1] - f_win[0])
    int_br = float(np.trapezoid(b_br[window], f_win))
    var_bg = (width * sigma_c0) ** 2 + (np.nan_to_num(sigma_nbr) * int_br) ** 2 \
        + 2.0 * width * int_br * cov01
    sigma_n_b_m = float(np.sqrt(max(var_area + var_bg, 0.0)) / area_bm_unit)

    ratio = (line.Gamma_em + line.Gamma_i) / line.Gamma_i
    return OccupancyResult(
        n_tilde_m=n_b_m / ratio,
        n_tilde_m_sigma=sigma_n_b_m / ratio,
        n_b_m=n_b_m,
        n_b_m_sigma=sigma_n_b_m,
        n_b_r=float(n_b_r),
        n_b_r_sigma=sigma_nbr,
    )
