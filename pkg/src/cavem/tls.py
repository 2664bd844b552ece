"""Standard tunneling model for two-level-system defects.

Energies, Stark shift, zero-point strain, strain/dipole coupling, the
saturable-linewidth law and a telegraph thermal-fluctuator model.  The
deformation potential is named deformation_gamma to keep it apart from the
mechanical linewidth gamma.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import h, hbar, k as k_B

DEBYE = 3.33564e-30  # C m, fixed convention
SILICON_YOUNGS_110 = 170e9  # Pa, <110> silicon, default for strain estimates

LINEWIDTH_VARIANTS = ("saturating", "as-printed")


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class TLSParams:
    """Two-level-system parameters: tunneling/asymmetry energies (J), dipole,
    deformation potential, and the epsilon/E ratio used for field shifts."""

    delta_tunneling: float
    epsilon_asym: float
    dipole_p: float = DEBYE
    deformation_gamma: float = 1.5 * 1.602176634e-19
    ratio_eps_over_E: float = 0.5

    def __post_init__(self) -> None:
        _check(0.0 <= self.ratio_eps_over_E <= 1.0, "ratio_eps_over_E must be in [0, 1]")


@dataclass(frozen=True)
class StrainMode:
    """Mechanical mode seen by a TLS: frequency, Young's modulus, strain mode volume."""

    omega_m: float
    youngs_modulus: float = SILICON_YOUNGS_110
    strain_mode_volume: float = 6e-21  # m^3

    def __post_init__(self) -> None:
        _check(self.omega_m > 0, "omega_m must be positive")
        _check(self.youngs_modulus > 0, "youngs_modulus must be positive")
        _check(self.strain_mode_volume > 0, "strain_mode_volume must be positive")


@dataclass(frozen=True)
class TLSLinewidthModel:
    """Saturable-linewidth parameters: participation, TLS decay, critical
    phonon number, exponent, residual linewidth, temperature, frequency."""

    F: float
    gamma_tls: float
    n_c: float
    beta: float
    gamma_0: float
    T: float
    omega: float

    def __post_init__(self) -> None:
        for name in ("F", "gamma_tls", "n_c", "gamma_0", "T", "omega"):
            _check(getattr(self, name) >= 0, f"{name} must be nonnegative")
        _check(0.0 < self.beta <= 2.0, "beta must be in (0, 2]")


@dataclass(frozen=True)
class TelegraphFluctuator:
    """Two-state fluctuator: up/down switching rates and dispersive frequency jump."""

    rate_up: float
    rate_down: float
    dispersive_shift: float

    def __post_init__(self) -> None:
        # rate_up = 0 is the frozen-ground-state limit used in tests
        _check(self.rate_up >= 0 and self.rate_down >= 0, "switching rates must be nonnegative")
        _check(self.rate_up + self.rate_down > 0, "at least one switching rate must be positive")

    @property
    def excited_probability(self) -> float:
        """Stationary excited-state probability rate_up / (rate_up + rate_down)."""
        return self.rate_up / (self.rate_up + self.rate_down)


def tls_energy(params: TLSParams) -> float:
    """TLS energy E = sqrt(delta^2 + epsilon^2), joules."""
    return math.hypot(params.delta_tunneling, params.epsilon_asym)


def stark_shift(params: TLSParams, E_field: float) -> float:
    """Electric-field tuning rate dE = 2 (eps/E) p E_field, returned as dE/h in Hz.

    Exactly linear in the applied field; zero for a symmetric TLS
    (ratio_eps_over_E = 0, i.e. epsilon = 0).
    """
    return 2.0 * params.ratio_eps_over_E * params.dipole_p * E_field / h


def strain_zpf(mode: StrainMode) -> float:
    """Zero-point strain S_zpf = sqrt(hbar omega_m / (2 E V_m)), dimensionless."""
    return math.sqrt(hbar * mode.omega_m / (2.0 * mode.youngs_modulus * mode.strain_mode_volume))


def strain_coupling(params: TLSParams, S_zpf: float) -> float:
    """Strain coupling hbar lambda = gamma_def (eps/E) S_zpf, returned cyclic (Hz)."""
    return params.deformation_gamma * params.ratio_eps_over_E * S_zpf / h


def dipole_coupling(params: TLSParams, E_zpf: float) -> float:
    """Dipole coupling hbar g = p E_zpf, returned cyclic (Hz); linear in the field."""
    return params.dipole_p * E_zpf / h


def saturable_linewidth(model: TLSLinewidthModel, n, variant: str = "saturating"):
    """TLS-limited linewidth versus phonon number n (units follow gamma_tls/gamma_0).

    Two variants are shipped:
      'saturating' (default): gamma = F gamma_tls tanh(hbar w / 2 k_B T)
                              / sqrt(1 + (n/n_c)^beta) + gamma_0,
                              the standard power-saturating law;
      'as-printed':           gamma = F gamma_tls / tanh(hbar w / 2 k_B T)
                              * sqrt(1 + (n/n_c)^beta) + gamma_0.
    """
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("phonon number must be nonnegative")
    if variant not in LINEWIDTH_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {LINEWIDTH_VARIANTS}")
    th = math.tanh(hbar * model.omega / (2.0 * k_B * model.T)) if model.T > 0 else 1.0
    root = np.sqrt(1.0 + (n / model.n_c) ** model.beta)
    if variant == "saturating":
        out = model.F * model.gamma_tls * th / root + model.gamma_0
    else:
        out = model.F * model.gamma_tls / th * root + model.gamma_0
    return float(out) if out.ndim == 0 else out


def telegraph_trace(tf: TelegraphFluctuator, f0: float, duration: float, dt: float,
                    seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampled center frequency of a mode dispersively coupled to a fluctuator.

    A two-state continuous-time Markov chain starting in the ground state;
    frequency = f0 + state * dispersive_shift, sampled every dt.
    Deterministic under a fixed seed; warns when dt does not resolve the
    switching.
    """
    _check(duration > 0 and dt > 0, "duration and dt must be positive")
    max_rate = max(tf.rate_up, tf.rate_down)
    if dt * max_rate > 0.1:
        warnings.warn("dt does not resolve the switching rates (dt * rate > 0.1)", stacklevel=2)
    rng = np.random.default_rng(seed)
    n = int(round(duration / dt))
    times = np.arange(n) * dt
    states = np.zeros(n, dtype=np.int8)
    state = 0
    t = 0.0
    idx = 0
    while idx < n:
        rate = tf.rate_up if state == 0 else tf.rate_down
        if rate == 0.0:
            states[idx:] = state
            break
        dwell = rng.exponential(1.0 / rate)
        stop = min(n, int(math.ceil((t + dwell) / dt)))
        states[idx:stop] = state
        idx = stop
        t += dwell
        state = 1 - state
    return times, f0 + states * tf.dispersive_shift


def strain_coupling_report(params: TLSParams, mode: StrainMode) -> dict[str, float]:
    """Strain-coupling estimate with its assumption trail.

    Reports lambda both with the epsilon/E projection factor and without it
    (the two published conventions differ exactly by that factor); the
    band they bracket is the honest uncertainty of the estimate.
    """
    s_zpf = strain_zpf(mode)
    lam = strain_coupling(params, s_zpf)
    lam_no_ratio = params.deformation_gamma * s_zpf / h
    return {
        "S_zpf": s_zpf,
        "lambda_hz": lam,
        "lambda_hz_no_ratio": lam_no_ratio,
        "band_low_hz": min(lam, lam_no_ratio),
        "band_high_hz": max(lam, lam_no_ratio),
        "ratio_eps_over_E": params.ratio_eps_over_E,
        "deformation_gamma_j": params.deformation_gamma,
        "youngs_modulus_pa": mode.youngs_modulus,
    }
