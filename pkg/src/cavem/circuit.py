"""Lumped-element equivalent circuit of the coupled cavity-mechanics system.

The mechanical resonance maps to a parallel LC (C_k, L_k_mech) in series
with the motion-coupled capacitance C_m; the microwave resonator is
(C_r, L_r).  C_k scales as V_dc^-2 and L_k_mech as V_dc^2, so their product
(and hence the mechanical frequency) is bias independent while the
capacitive coupling grows linearly with bias.

Note on the C_k expression: the dimensionally consistent form has hbar in
the numerator,

    C_k = 2 hbar C_m^2 omega_m / (dC_dx * x_zpf * V_dc)^2 - C_m,

which is the unique inversion compatible with g = C_m/sqrt((C_k+C_m)(C_r+C_m))
* sqrt(omega_r omega_m) and with hbar*g = dC_dx * x_zpf * V_zpf * V_dc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import hbar

from .units import TWO_PI, cyclic


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class EquivalentCircuit:
    """Element values of the equivalent circuit; C_k/L_k_mech quoted at V_ref."""

    C_m: float
    C_r: float
    L_r: float
    C_k: float
    L_k_mech: float
    V_ref: float = 1.0
    Z0: float = 50.0

    def __post_init__(self) -> None:
        for name in ("C_m", "C_r", "L_r", "C_k", "L_k_mech", "Z0"):
            _check(getattr(self, name) > 0, f"{name} must be positive")
        _check(self.V_ref != 0, "V_ref must be nonzero")

    def at_voltage(self, V_dc: float) -> "EquivalentCircuit":
        """Rescale the bias-dependent elements to V_dc: C_k ~ V^-2, L_k_mech ~ V^2.

        The exact invariant is (C_k + C_m) L_k_mech, so it is C_k + C_m that
        carries the V^-2 law (corrections to the bare C_k scaling are of
        order C_m); this keeps omega_m exactly bias independent.
        """
        _check(V_dc != 0, "C_k diverges at zero bias (coupling off)")
        ratio2 = (self.V_ref / V_dc) ** 2
        c_k = (self.C_k + self.C_m) * ratio2 - self.C_m
        _check(c_k > 0, "bias too large for the equivalent-circuit model (C_k <= 0)")
        return replace(self, C_k=c_k, L_k_mech=self.L_k_mech / ratio2, V_ref=V_dc)

    @property
    def omega_m(self) -> float:
        """Mechanical angular frequency [L_k_mech (C_k + C_m)]^(-1/2)."""
        return 1.0 / math.sqrt(self.L_k_mech * (self.C_k + self.C_m))

    @property
    def participation(self) -> float:
        """Electromechanical participation ratio eta = C_m / (C_m + C_r)."""
        return self.C_m / (self.C_m + self.C_r)


def mech_equiv_capacitance(C_m: float, omega_m: float, dC_dx: float, x_zpf: float,
                           V_dc: float) -> float:
    """Equivalent mechanical capacitance at bias V_dc.

    C_k = 2 hbar C_m^2 omega_m / (dC_dx x_zpf V_dc)^2 - C_m  (see module note).
    """
    for name, val in (("C_m", C_m), ("omega_m", omega_m), ("dC_dx", dC_dx), ("x_zpf", x_zpf)):
        _check(val > 0, f"{name} must be positive")
    if V_dc == 0:
        raise ValueError("C_k diverges at zero bias (coupling off)")
    q = dC_dx * x_zpf * V_dc
    return 2.0 * hbar * C_m**2 * omega_m / q**2 - C_m


def mech_equiv_inductance(C_k: float, C_m: float, omega_m: float) -> float:
    """Equivalent mechanical inductance from omega_m = [L_k (C_k + C_m)]^(-1/2)."""
    _check(C_k > 0 and C_m > 0 and omega_m > 0, "inputs must be positive")
    return 1.0 / (omega_m**2 * (C_k + C_m))


def coupling_from_circuit(circuit: EquivalentCircuit, omega_r: float, omega_m: float) -> float:
    """Capacitive coupling g = C_m/sqrt((C_k+C_m)(C_r+C_m)) * sqrt(omega_r omega_m), cyclic Hz."""
    _check(omega_r > 0 and omega_m > 0, "frequencies must be positive")
    g_angular = (
        circuit.C_m
        / math.sqrt((circuit.C_k + circuit.C_m) * (circuit.C_r + circuit.C_m))
        * math.sqrt(omega_r * omega_m)
    )
    return cyclic(g_angular)


def resonator_derived(circuit: EquivalentCircuit) -> dict[str, float]:
    """Resonator frequency (Hz), characteristic impedance and participation ratio."""
    f_r = 1.0 / (TWO_PI * math.sqrt(circuit.L_r * circuit.C_r))
    impedance = math.sqrt(circuit.L_r / circuit.C_r)
    return {"f_r": f_r, "Z": impedance, "eta": circuit.participation}


def direct_waveguide_decay(circuit: EquivalentCircuit, omega_m: float) -> float:
    """Direct external decay of the mechanics into the Z0 line, cyclic Hz.

    kappa_direct = omega_m^2 C_m^2 Z0 / (C_k + C_m), the external decay of
    the series-equivalent mechanical circuit; use circuit.at_voltage(V)
    first to evaluate at a bias point.
    """
    _check(omega_m > 0, "omega_m must be positive")
    kappa_direct = omega_m**2 * circuit.C_m**2 * circuit.Z0 / (circuit.C_k + circuit.C_m)
    return cyclic(kappa_direct)


def from_physical(g0: float, omega_r: float, omega_m: float, C_m: float,
                  C_r: float | None = None, V_zpf: float | None = None,
                  Z0: float = 50.0) -> EquivalentCircuit:
    """Build the equivalent circuit (at V_ref = 1 V) from physical parameters.

    g0 is the cyclic coupling slope in Hz/V.  Either C_r or V_zpf pins the
    resonator capacitance (V_zpf refers to the resonator capacitance,
    C_r = hbar omega_r / (2 V_zpf^2)); giving both inconsistently is an
    error.  Round trip: coupling_from_circuit(from_physical(g0, ...)) == g0.
    """
    _check(g0 > 0, "g0 must be positive")
    _check(omega_r > 0 and omega_m > 0 and C_m > 0, "inputs must be positive")
    if C_r is None and V_zpf is None:
        raise ValueError("need C_r or V_zpf")
    if V_zpf is not None:
        c_r_from_v = hbar * omega_r / (2.0 * V_zpf**2)
        if C_r is not None and abs(C_r - c_r_from_v) > 1e-9 * C_r:
            raise ValueError("C_r and V_zpf are inconsistent")
        C_r = c_r_from_v
    g_angular = TWO_PI * g0
    root = C_m * math.sqrt(omega_r * omega_m) / (g_angular * math.sqrt(C_r + C_m))
    C_k = root**2 - C_m
    if C_k <= 0:
        raise ValueError("g0 too large to realize with the given capacitances")
    return EquivalentCircuit(
        C_m=C_m,
        C_r=C_r,
        L_r=1.0 / (omega_r**2 * C_r),
        C_k=C_k,
        L_k_mech=mech_equiv_inductance(C_k, C_m, omega_m),
        V_ref=1.0,
        Z0=Z0,
    )


# ---------------------------------------------------------------------------
# Circuit-table I/O (same declarative format as the device table)

_CIRCUIT_FIELDS = {
    "C_m": ("F", True),
    "C_r": ("F", True),
    "L_r": ("H", True),
    "C_k": ("F", True),
    "L_k_mech": ("H", True),
    "V_ref": ("V", True),
    "Z0": ("Ohm", True),
}


def load_circuits(path) -> list[tuple[str, EquivalentCircuit]]:
    """Load (id, EquivalentCircuit) pairs from a declarative table file."""
    from .device import _parse_fields, _parse_sections

    out = []
    for ident, raw, linenos in _parse_sections(path, "circuit"):
        v = _parse_fields(path, ident, raw, linenos, _CIRCUIT_FIELDS)
        out.append((ident, EquivalentCircuit(**v)))
    return out


def save_circuits(circuits: list[tuple[str, EquivalentCircuit]], path) -> None:
    """Serialize (id, EquivalentCircuit) pairs; round-trips through load_circuits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# cavem circuit table\n")
        for ident, c in circuits:
            fh.write(f"\n[circuit {ident}]\n")
            fh.write(f"C_m = {c.C_m:.17g} F\n")
            fh.write(f"C_r = {c.C_r:.17g} F\n")
            fh.write(f"L_r = {c.L_r:.17g} H\n")
            fh.write(f"C_k = {c.C_k:.17g} F\n")
            fh.write(f"L_k_mech = {c.L_k_mech:.17g} H\n")
            fh.write(f"V_ref = {c.V_ref:.17g} V\n")
            fh.write(f"Z0 = {c.Z0:.17g} Ohm\n")
