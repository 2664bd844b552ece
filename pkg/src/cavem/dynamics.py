"""Two-mode input-output dynamics: susceptibilities, EIT reflection,
hybridized modes, readout rate, back-action occupancies, drive response.

Convention notes.  Mode objects carry angular quantities (rad/s); the
system coupling g is cyclic (Hz) as measured, and is converted internally.
Ratio-type formulas (em_readout_rate, cooperativity) are homogeneous in
their rate arguments: pass all of them in one convention and the result is
in that convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import hbar

from . import _kernels
from .device import MechanicalMode, MicrowaveMode
from .units import TWO_PI, cyclic


@dataclass(frozen=True)
class TwoModeSystem:
    """Microwave mode + mechanical mode + coupling (cyclic Hz) + Fano phase.

    The Fano asymmetry is modeled as a complex phase on kappa_e in the
    reflection; 0 reproduces the plain input-output expression.  Probe
    detunings are computed per evaluation, never stored.
    """

    mw: MicrowaveMode
    mech: MechanicalMode
    g: float
    fano_phase: float = 0.0

    @property
    def g_angular(self) -> float:
        return TWO_PI * self.g


@dataclass(frozen=True)
class BathSpec:
    """Occupancies (quanta) of the waveguide, microwave and mechanical baths."""

    n_wg: float = 0.0
    n_b_r: float = 0.0
    n_b_m: float = 0.0

    def __post_init__(self) -> None:
        if min(self.n_wg, self.n_b_r, self.n_b_m) < 0:
            raise ValueError("bath occupancies must be nonnegative")


class BackactionResult(NamedTuple):
    n_r: float
    n_m: float
    C_eff: float


def chi_r(mw: MicrowaveMode, omega):
    """Bare electrical susceptibility, 1 / (kappa/2 - i (omega - omega_r))."""
    return 1.0 / (0.5 * mw.kappa_total - 1j * (np.asarray(omega, dtype=float) - mw.omega_r))


def chi_m(mech: MechanicalMode, omega):
    """Bare mechanical susceptibility, 1 / (gamma_i/2 - i (omega - omega_m))."""
    return 1.0 / (
        0.5 * mech.gamma_i_intrinsic_decay
        - 1j * (np.asarray(omega, dtype=float) - mech.omega_m)
    )


def eit_reflection(system: TwoModeSystem, omega_probe):
    """Complex reflection of the coupled system at angular probe frequency.

    r = 1 - kappa_e e^{i phi} / (i Delta + kappa/2 + g^2/(i delta + gamma/2))
    with Delta = omega_r - omega, delta = omega_m - omega.  gamma is the
    total mechanical linewidth (what a linewidth fit measures); the
    intrinsic rate enters only through thermometry.
    """
    scalar = np.isscalar(omega_probe)
    omega = np.atleast_1d(np.asarray(omega_probe, dtype=float))
    r = _kernels.eit_reflection_grid(
        omega,
        system.mw.omega_r,
        system.mw.kappa_i,
        system.mw.kappa_e,
        system.mech.omega_m,
        system.mech.gamma_total_linewidth,
        system.g_angular,
        system.fano_phase,
    )
    return complex(r[0]) if scalar else r


def hybridized_modes(system: TwoModeSystem) -> tuple[complex, complex]:
    """Complex eigenfrequencies (f - i*rate/2, cyclic Hz) of the coupled pair.

    Eigenvalues of [[omega_r - i kappa/2, g], [g, omega_m - i gamma/2]],
    returned in cyclic units, ordered by real part.  On resonance with
    2g > (kappa - gamma)/2 the real splitting is
    sqrt(4 g^2 - ((kappa - gamma)/2)^2) and both linewidths are
    (kappa + gamma)/2.
    """
    f_r = cyclic(system.mw.omega_r)
    f_m = cyclic(system.mech.omega_m)
    kappa = cyclic(system.mw.kappa_total)
    gamma = cyclic(system.mech.gamma_total_linewidth)
    matrix = np.array(
        [
            [f_r - 0.5j * kappa, system.g],
            [system.g, f_m - 0.5j * gamma],
        ],
        dtype=complex,
    )
    ev = np.linalg.eigvals(matrix)
    lo, hi = sorted(ev, key=lambda z: z.real)
    return (lo, hi)


def em_readout_rate(g: float, kappa: float, Delta: float) -> float:
    """Electromechanical readout rate Gamma_em = g^2 kappa / (Delta^2 + (kappa/2)^2).

    Homogeneous in rates: pass g, kappa, Delta in one convention (all
    cyclic or all angular); the result is in that convention.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return g * g * kappa / (Delta * Delta + 0.25 * kappa * kappa)


def cooperativity(g: float, kappa_i: float, Gamma_i: float) -> float:
    """C = 4 g^2 / (kappa_i Gamma_i); dimensionless, inputs in one convention."""
    if kappa_i <= 0 or Gamma_i <= 0:
        raise ValueError("kappa_i and Gamma_i must be positive")
    return 4.0 * g * g / (kappa_i * Gamma_i)


def backaction_occupancies(system: TwoModeSystem, baths: BathSpec, Delta: float) -> BackactionResult:
    """Steady-state mode occupancies under electromechanical back-action.

    Delta is the (angular) cavity-mechanics detuning.  Valid in weak
    coupling; warns when 2g > kappa.  C_eff = g^2 kappa / gamma_i /
    (Delta^2 + (kappa/2)^2), n_r is the kappa-weighted bath mix and
    n_m = (n_b_m + C_eff n_r) / (1 + C_eff).
    """
    kappa = system.mw.kappa_total
    g = system.g_angular
    if 2.0 * g > kappa:
        warnings.warn("2g > kappa: outside the weak-coupling validity range", stacklevel=2)
    gamma_i = system.mech.gamma_i_intrinsic_decay
    if gamma_i <= 0:
        raise ValueError("gamma_i must be positive")
    c_eff = em_readout_rate(g, kappa, Delta) / gamma_i
    n_r = (system.mw.kappa_i * baths.n_b_r + system.mw.kappa_e * baths.n_wg) / kappa
    n_m = (baths.n_b_m + c_eff * n_r) / (1.0 + c_eff)
    return BackactionResult(n_r=n_r, n_m=n_m, C_eff=c_eff)


def spring_shifted_frequency(system: TwoModeSystem, Delta: float) -> float:
    """Mechanical frequency pulled by the electromechanical spring (rad/s).

    omega_m_tilde = omega_m - g^2 Delta / (Delta^2 + (kappa/2)^2) with
    angular g and Delta = omega_r - omega_m: a cavity above the mechanics
    pulls the mechanical frequency down.  (Standard sideband-resolved
    expression from the linearized equations of motion.)
    """
    g = system.g_angular
    kappa = system.mw.kappa_total
    return system.mech.omega_m - g * g * Delta / (Delta * Delta + 0.25 * kappa * kappa)


def coherent_phonon_number(system: TwoModeSystem, Delta: float, delta: float,
                           P_in: float, omega_d: float) -> float:
    """Steady-state coherent phonon population under a drive of power P_in.

    Drive photon flux |a_in|^2 = P_in / (hbar omega_d); the steady state of
    the linearized equations gives
    n_coh = | g sqrt(kappa_e) a_in / ((i delta + gamma/2)(i Delta + kappa/2) + g^2) |^2.
    Delta/delta are the angular cavity/mechanics detunings from the drive.
    """
    if P_in < 0:
        raise ValueError("P_in must be nonnegative")
    g = system.g_angular
    flux = P_in / (hbar * omega_d)
    denom = (1j * delta + 0.5 * system.mech.gamma_total_linewidth) * (
        1j * Delta + 0.5 * system.mw.kappa_total
    ) + g * g
    return g * g * system.mw.kappa_e * flux / abs(denom) ** 2


def quality_factor(omega_m: float, tau: float) -> float:
    """Q = omega_m * tau for an energy decay lifetime tau."""
    return omega_m * tau
