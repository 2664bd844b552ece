"""Physical device parametrization: modes, coupling law, nanowire inductor.

Frequencies and decay rates on these types are angular (rad/s); the device
table on disk and every public report use cyclic values (omega/2pi, Hz).
The coupling slope g0 is cyclic Hz per volt throughout, matching how it is
measured and quoted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace
from importlib import resources

from scipy.constants import hbar

from .units import TWO_PI, UnitError, angular, cyclic, parse_quantity

TUNING_ENVELOPE = 0.06  # validated fractional magnetic-tuning range


class DeviceTableError(ValueError):
    """Raised when a device/circuit table cannot be parsed; names line and field."""


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class MechanicalMode:
    """A mechanical resonance: angular frequency, energy decay and total linewidth.

    gamma_total_linewidth >= gamma_i_intrinsic_decay; the excess is jitter
    broadening (dephasing).  x_zpf is derived from m_eff when both are
    meaningful: x_zpf = sqrt(hbar / (2 m_eff omega_m)).
    """

    omega_m: float
    gamma_i_intrinsic_decay: float
    gamma_total_linewidth: float
    m_eff: float | None = None
    x_zpf: float | None = None

    def __post_init__(self) -> None:
        _check(self.omega_m > 0, "omega_m must be positive")
        _check(self.gamma_i_intrinsic_decay >= 0, "intrinsic decay must be nonnegative")
        _check(
            self.gamma_total_linewidth >= self.gamma_i_intrinsic_decay,
            "total linewidth cannot be below the intrinsic decay rate",
        )
        if self.m_eff is not None:
            _check(self.m_eff > 0, "m_eff must be positive")
            derived = math.sqrt(hbar / (2.0 * self.m_eff * self.omega_m))
            if self.x_zpf is None:
                object.__setattr__(self, "x_zpf", derived)
            else:
                _check(
                    abs(self.x_zpf - derived) <= 1e-12 * derived,
                    "x_zpf inconsistent with m_eff and omega_m",
                )


@dataclass(frozen=True)
class MicrowaveMode:
    """A microwave resonance with intrinsic and external (waveguide) decay."""

    omega_r: float
    kappa_i: float
    kappa_e: float
    C_total: float | None = None
    V_zpf: float | None = None

    def __post_init__(self) -> None:
        _check(self.omega_r > 0, "omega_r must be positive")
        _check(self.kappa_i >= 0 and self.kappa_e >= 0, "decay rates must be nonnegative")
        if self.C_total is not None:
            _check(self.C_total > 0, "C_total must be positive")
            derived = math.sqrt(hbar * self.omega_r / (2.0 * self.C_total))
            if self.V_zpf is None:
                object.__setattr__(self, "V_zpf", derived)
            else:
                _check(
                    abs(self.V_zpf - derived) <= 1e-12 * derived,
                    "V_zpf inconsistent with C_total and omega_r",
                )

    @property
    def kappa_total(self) -> float:
        """Total decay kappa_i + kappa_e (derived, never stored)."""
        return self.kappa_i + self.kappa_e


@dataclass(frozen=True)
class CouplingLaw:
    """Linear voltage-to-coupling law g(V) = g0 * (V - V_offset), g0 in cyclic Hz/V."""

    g0: float
    V_offset: float = 0.0


@dataclass(frozen=True)
class NanowireInductor:
    """Kinetic-inductance nanowire: sheet inductance, geometry, nonlinearity, tuning."""

    L_sheet: float  # H per square
    length: float
    width: float
    I_star: float
    k_tune: float  # cyclic Hz per tesla^2

    def __post_init__(self) -> None:
        _check(self.L_sheet > 0, "L_sheet must be positive")
        _check(self.length > 0 and self.width > 0, "geometry must be positive")
        _check(self.width <= self.length, "width must not exceed length")
        _check(self.I_star > 0, "I_star must be positive")
        _check(self.k_tune >= 0, "k_tune must be nonnegative")


@dataclass(frozen=True)
class DeviceRecord:
    """Full parametrization of one device (modes, coupling, operating point)."""

    id: str
    mechanical: MechanicalMode
    microwave: MicrowaveMode
    coupling: CouplingLaw
    T_mxc: float
    tau_d_max: float
    tau_c_max: float
    inductor: NanowireInductor | None = None


def coupling_at_voltage(law: CouplingLaw, V_dc: float) -> float:
    """Coupling g = g0 * (V_dc - V_offset) in cyclic Hz.

    The sign is carried; dynamics only ever uses g^2, so it never affects
    observables.
    """
    return law.g0 * (V_dc - law.V_offset)


def kinetic_inductance(ind: NanowireInductor) -> float:
    """Total kinetic inductance of a quarter-wave nanowire, L = L_sheet * (8/pi^2) * (l/w)."""
    return ind.L_sheet * (8.0 / math.pi**2) * (ind.length / ind.width)


def inductance_vs_current(L_k0: float, I: float, I_star: float) -> float:
    """Current nonlinearity L(I) = L(0) * (1 + (I/I_star)^2)."""
    _check(I_star > 0, "I_star must be positive")
    return L_k0 * (1.0 + (I / I_star) ** 2)


def tuned_frequency(omega_max: float, k_tune: float, B: float) -> float:
    """Parabolic magnetic tuning: cyclic shift -k_tune * B^2 applied to omega_max.

    Warns (does not error) when the fractional tuning leaves the ~6% range
    over which the parabolic law is validated.
    """
    f_max = cyclic(omega_max)
    f_tuned = f_max - k_tune * B * B
    if f_max > 0 and abs(f_max - f_tuned) / f_max > TUNING_ENVELOPE:
        warnings.warn(
            f"fractional tuning {abs(f_max - f_tuned) / f_max:.3g} exceeds the "
            f"validated {TUNING_ENVELOPE:.0%} envelope",
            stacklevel=2,
        )
    return angular(f_tuned)


# ---------------------------------------------------------------------------
# Device table I/O
#
# Format: '[device <id>]' section headers followed by 'dotted.field = value unit'
# lines; '#' starts a comment.  Frequencies and rates are cyclic in the file
# and converted to angular on load.

_ANGULAR_FIELDS = {
    "mechanical.omega_m",
    "mechanical.gamma_i_intrinsic_decay",
    "mechanical.gamma_total_linewidth",
    "microwave.omega_r",
    "microwave.kappa_i",
    "microwave.kappa_e",
}

# field -> (expected unit label, required)
_DEVICE_FIELDS = {
    "mechanical.omega_m": ("Hz", True),
    "mechanical.gamma_i_intrinsic_decay": ("Hz", False),
    "mechanical.gamma_total_linewidth": ("Hz", False),
    "mechanical.m_eff": ("kg", False),
    "mechanical.x_zpf": ("m", False),
    "microwave.omega_r": ("Hz", True),
    "microwave.kappa_i": ("Hz", True),
    "microwave.kappa_e": ("Hz", True),
    "microwave.C_total": ("F", False),
    "microwave.V_zpf": ("V", False),
    "coupling.g0": ("Hz/V", True),
    "coupling.V_offset": ("V", True),
    "T_mxc": ("K", True),
    "tau_d_max": ("s", True),
    "tau_c_max": ("s", True),
    "inductor.L_sheet": ("H", False),
    "inductor.length": ("m", False),
    "inductor.width": ("m", False),
    "inductor.I_star": ("A", False),
    "inductor.k_tune": ("Hz/T^2", False),
}

_INDUCTOR_KEYS = ("L_sheet", "length", "width", "I_star", "k_tune")


def _parse_sections(path, header: str) -> list[tuple[str, dict[str, str], dict[str, int]]]:
    """Split a table file into (section id, {field: raw value}, {field: line no})."""
    sections: list[tuple[str, dict[str, str], dict[str, int]]] = []
    current: dict[str, str] | None = None
    lines: dict[str, int] | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise DeviceTableError(f"{path}: line {lineno}: unterminated section header")
                inner = line[1:-1].strip()
                kind, _, ident = inner.partition(" ")
                if kind != header or not ident.strip():
                    raise DeviceTableError(
                        f"{path}: line {lineno}: expected '[{header} <id>]', got {line!r}"
                    )
                current = {}
                lines = {}
                sections.append((ident.strip().strip('"'), current, lines))
                continue
            if current is None:
                raise DeviceTableError(f"{path}: line {lineno}: field outside a [{header} ...] section")
            key, sep, value = line.partition("=")
            if not sep:
                raise DeviceTableError(f"{path}: line {lineno}: expected 'field = value'")
            key = key.strip()
            if key in current:
                raise DeviceTableError(f"{path}: line {lineno}: duplicate field {key!r}")
            current[key] = value.strip()
            lines[key] = lineno
    return sections


def _parse_fields(path, ident, raw: dict[str, str], linenos: dict[str, int],
                  schema: dict[str, tuple[str, bool]]) -> dict[str, float]:
    values: dict[str, float] = {}
    for key, text in raw.items():
        if key not in schema:
            raise DeviceTableError(
                f"{path}: line {linenos[key]}: unknown field {key!r} in section {ident!r}"
            )
        expect, _ = schema[key]
        try:
            values[key] = parse_quantity(text, expect=expect)
        except UnitError as err:
            raise DeviceTableError(
                f"{path}: line {linenos[key]}: field {key!r}: {err}"
            ) from err
    for key, (_, required) in schema.items():
        if required and key not in values:
            raise DeviceTableError(f"{path}: section {ident!r}: missing required field {key!r}")
    return values


def load_devices(path) -> list[DeviceRecord]:
    """Load device records from a declarative table file.

    The mechanical decay rates default to the Table-referenced lifetimes
    (gamma_i = 1/tau_d_max, gamma_total = 1/tau_c_max) when not given
    explicitly.
    """
    records = []
    for ident, raw, linenos in _parse_sections(path, "device"):
        v = _parse_fields(path, ident, raw, linenos, _DEVICE_FIELDS)
        for key in _ANGULAR_FIELDS:
            if key in v:
                v[key] = angular(v[key])
        gamma_i = v.get("mechanical.gamma_i_intrinsic_decay", 1.0 / v["tau_d_max"])
        gamma_tot = v.get("mechanical.gamma_total_linewidth", 1.0 / v["tau_c_max"])
        mech = MechanicalMode(
            omega_m=v["mechanical.omega_m"],
            gamma_i_intrinsic_decay=gamma_i,
            gamma_total_linewidth=gamma_tot,
            m_eff=v.get("mechanical.m_eff"),
            x_zpf=v.get("mechanical.x_zpf"),
        )
        mw = MicrowaveMode(
            omega_r=v["microwave.omega_r"],
            kappa_i=v["microwave.kappa_i"],
            kappa_e=v["microwave.kappa_e"],
            C_total=v.get("microwave.C_total"),
            V_zpf=v.get("microwave.V_zpf"),
        )
        law = CouplingLaw(g0=v["coupling.g0"], V_offset=v["coupling.V_offset"])
        inductor = None
        ind_given = [k for k in _INDUCTOR_KEYS if f"inductor.{k}" in v]
        if ind_given:
            missing = [k for k in _INDUCTOR_KEYS if f"inductor.{k}" not in v]
            if missing:
                raise DeviceTableError(
                    f"{path}: section {ident!r}: incomplete inductor block, missing "
                    + ", ".join(f"inductor.{k}" for k in missing)
                )
            inductor = NanowireInductor(*(v[f"inductor.{k}"] for k in _INDUCTOR_KEYS))
        records.append(
            DeviceRecord(
                id=ident,
                mechanical=mech,
                microwave=mw,
                coupling=law,
                T_mxc=v["T_mxc"],
                tau_d_max=v["tau_d_max"],
                tau_c_max=v["tau_c_max"],
                inductor=inductor,
            )
        )
    return records


def save_devices(records: list[DeviceRecord], path) -> None:
    """Serialize device records to the same declarative format (plain SI values).

    Angular fields are written as cyclic values; a serialize/parse round
    trip reproduces every field to within one floating-point ulp (the
    cyclic <-> angular conversion at the I/O boundary costs at most one
    rounding).
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# cavem device table; frequencies/rates are cyclic (omega/2pi)\n")
        for rec in records:
            fh.write(f"\n[device {rec.id}]\n")
            m = rec.mechanical
            fh.write(f"mechanical.omega_m = {cyclic(m.omega_m):.17g} Hz\n")
            fh.write(
                f"mechanical.gamma_i_intrinsic_decay = {cyclic(m.gamma_i_intrinsic_decay):.17g} Hz\n"
            )
            fh.write(
                f"mechanical.gamma_total_linewidth = {cyclic(m.gamma_total_linewidth):.17g} Hz\n"
            )
            if m.m_eff is not None:
                fh.write(f"mechanical.m_eff = {m.m_eff:.17g} kg\n")
            elif m.x_zpf is not None:
                fh.write(f"mechanical.x_zpf = {m.x_zpf:.17g} m\n")
            w = rec.microwave
            fh.write(f"microwave.omega_r = {cyclic(w.omega_r):.17g} Hz\n")
            fh.write(f"microwave.kappa_i = {cyclic(w.kappa_i):.17g} Hz\n")
            fh.write(f"microwave.kappa_e = {cyclic(w.kappa_e):.17g} Hz\n")
            if w.C_total is not None:
                fh.write(f"microwave.C_total = {w.C_total:.17g} F\n")
            elif w.V_zpf is not None:
                fh.write(f"microwave.V_zpf = {w.V_zpf:.17g} V\n")
            fh.write(f"coupling.g0 = {rec.coupling.g0:.17g} Hz/V\n")
            fh.write(f"coupling.V_offset = {rec.coupling.V_offset:.17g} V\n")
            fh.write(f"T_mxc = {rec.T_mxc:.17g} K\n")
            fh.write(f"tau_d_max = {rec.tau_d_max:.17g} s\n")
            fh.write(f"tau_c_max = {rec.tau_c_max:.17g} s\n")
            if rec.inductor is not None:
                ind = rec.inductor
                fh.write(f"inductor.L_sheet = {ind.L_sheet:.17g} H\n")
                fh.write(f"inductor.length = {ind.length:.17g} m\n")
                fh.write(f"inductor.width = {ind.width:.17g} m\n")
                fh.write(f"inductor.I_star = {ind.I_star:.17g} A\n")
                fh.write(f"inductor.k_tune = {ind.k_tune:.17g} Hz/T^2\n")


def bundled_device_path():
    """Path to the device table shipped with the package."""
    return resources.files("cavem.data").joinpath("devices.cfg")


def load_bundled_devices() -> list[DeviceRecord]:
    """Load the two characterized devices shipped with the package."""
    with resources.as_file(bundled_device_path()) as path:
        return load_devices(path)


def get_device(device_id: str) -> DeviceRecord:
    """Fetch one bundled device by id ('A' or 'B')."""
    for rec in load_bundled_devices():
        if rec.id == device_id:
            return rec
    raise KeyError(f"no bundled device {device_id!r}")
