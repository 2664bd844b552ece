"""DC actuation: parallel-plate pull-in instability, leakage line fit, and
the empirical coupling scaling laws (cell count and vacuum gap).

The parallel-plate model is the textbook baseline; measured devices show
linear g(V) with no gradual gap shrinkage, so it bounds rather than
describes them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import epsilon_0

GAP_EXPONENT = -1.66  # fitted coupling-vs-gap power law
MAX_COHERENT_CELLS = 9  # disorder limits the sqrt(N) growth beyond this


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class ParallelPlateActuator:
    """Spring constant (N/m), plate area (m^2) and rest gap (m)."""

    k_spring: float
    area: float
    gap0: float

    def __post_init__(self) -> None:
        _check(self.k_spring > 0 and self.area > 0 and self.gap0 > 0, "fields must be positive")


def pull_in_voltage(act: ParallelPlateActuator) -> float:
    """Bifurcation voltage V_PI = sqrt(8 k gap0^3 / (27 eps0 A))."""
    return math.sqrt(8.0 * act.k_spring * act.gap0**3 / (27.0 * epsilon_0 * act.area))


def stiffness_from_pull_in(V_pi: float, area: float, gap0: float) -> float:
    """Invert pull_in_voltage for the spring constant."""
    _check(V_pi > 0 and area > 0 and gap0 > 0, "inputs must be positive")
    return 27.0 * epsilon_0 * area * V_pi**2 / (8.0 * gap0**3)


def equilibrium_gap(act: ParallelPlateActuator, V: float) -> float | None:
    """Stable equilibrium gap at bias V, or None past the pull-in instability.

    Solves k (gap0 - x) = eps0 A V^2 / (2 x^2) for the stable root
    x in (2/3 gap0, gap0] by bracketed bisection (1e-12 relative); at the
    bifurcation the root is exactly 2/3 gap0.
    """
    _check(V >= 0, "V must be nonnegative")
    if V == 0.0:
        return act.gap0
    v_pi = pull_in_voltage(act)
    if V > v_pi * (1.0 + 1e-14):
        return None
    lo = 2.0 * act.gap0 / 3.0
    if V >= v_pi * (1.0 - 1e-14):
        return lo
    c = epsilon_0 * act.area * V * V / 2.0

    def balance(x: float) -> float:
        return act.k_spring * (act.gap0 - x) - c / (x * x)

    hi = act.gap0
    f_lo = balance(lo)
    if f_lo <= 0.0:  # numerically at the bifurcation
        return lo
    while (hi - lo) > 1e-12 * act.gap0:
        mid = 0.5 * (lo + hi)
        if balance(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class LeakageFit(NamedTuple):
    R: float
    I_offset: float


def leakage_fit(iv_points) -> LeakageFit:
    """Least-squares line through (V, I) points; R is the inverse slope."""
    pts = np.asarray(iv_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (V, I) points")
    v, i = pts[:, 0], pts[:, 1]
    if np.ptp(v) == 0.0:
        raise ValueError("degenerate I-V data: all voltages identical")
    slope, intercept = np.polyfit(v, i, 1)
    if slope == 0.0:
        raise ValueError("zero slope: resistance undefined")
    return LeakageFit(R=1.0 / slope, I_offset=float(intercept))


def coupling_scaling(g0_ref: float, *, n_cells: float | None = None, n_ref: float = MAX_COHERENT_CELLS,
                     gap: float | None = None, gap_ref: float = 70e-9) -> float:
    """Scale a reference coupling by cell count (sqrt law) or vacuum gap (power law).

    g0 = g0_ref sqrt(N/N_ref) for the cell-count law, valid for N in
    [1, 9] (a warning marks the disorder-dominated regime beyond), or
    g0 = g0_ref (gap/gap_ref)^-1.66 for the gap law.  Exactly one of
    n_cells, gap must be given.
    """
    if (n_cells is None) == (gap is None):
        raise ValueError("give exactly one of n_cells or gap")
    if n_cells is not None:
        _check(n_cells >= 1, "n_cells must be at least 1")
        if n_cells > MAX_COHERENT_CELLS:
            warnings.warn(
                f"n_cells > {MAX_COHERENT_CELLS}: disorder-dominated regime, "
                "the sqrt(N) growth no longer holds",
                stacklevel=2,
            )
        return g0_ref * math.sqrt(n_cells / n_ref)
    _check(gap > 0 and gap_ref > 0, "gaps must be positive")
    return g0_ref * (gap / gap_ref) ** GAP_EXPONENT
